#ifndef SKELSIM_TYPES_HPP
#define SKELSIM_TYPES_HPP

#include <stdexcept>
#include <string>

namespace skelsim {

using NodeId = std::string;
using ResourceId = std::string;

enum class Concern { Performance, Security, Power };

enum class PowerClass { Green, Amber, Red };

enum class ChannelKind { Plain, Ssl };

std::string to_string(Concern c);
std::string to_string(PowerClass p);
std::string to_string(ChannelKind k);

enum class Errc {
  MalformedSkeleton,
  StaleDelta,
  WouldMalform,
  UnknownTarget,
  KeyClassMismatch,
  UnknownRule,
  InsufficientResources,
  DuplicateConcern,
  NoFreeResource,
  RemoveLastWorker,
  UnplacedNode,
  StaleDecision,
  ActionFailure,
  InvalidScenario,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace skelsim

#endif
