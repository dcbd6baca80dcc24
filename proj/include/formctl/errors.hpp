#pragma once

#include <stdexcept>
#include <string>

namespace formctl {

// Two agents are closer than the coincidence tolerance; bearings (and the
// simulation that needs them) are undefined there.
struct CoincidentAgents : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A target placement contains coincident agents, so its bearings cannot be
// recomputed.
struct DegenerateTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The follower grounding block is numerically singular; the target placement
// is not uniquely determined by the leaders.
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Leader positions contradict a desired inter-leader bearing, or the desired
// bearing set admits no placement that reproduces it.
struct InconsistentLeaders : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Collision-certificate clearance parameter outside (0, min target spacing).
struct InvalidKappa : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input file is not well-formed (JSON syntax, missing fields, wrong types).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input parses but violates a semantic rule; the message names the field and
// the rule it breaks.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure while reading or writing artifacts.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace formctl
