#pragma once

namespace mia {

// Membership decision: 1 iff probability >= theta (ties accept).
inline int apply_threshold(double probability, double theta) { return probability >= theta ? 1 : 0; }

}  // namespace mia
