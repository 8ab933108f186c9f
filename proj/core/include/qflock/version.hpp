#ifndef QFLOCK_VERSION_HPP
#define QFLOCK_VERSION_HPP

namespace qflock {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qflock

#endif  // QFLOCK_VERSION_HPP
