#pragma once

#include <iosfwd>

namespace aeattack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

/// Entry point behind the `aeattack` executable: train, craft, evaluate, compare.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aeattack::cli
