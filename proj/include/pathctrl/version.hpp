#ifndef PATHCTRL_VERSION_HPP
#define PATHCTRL_VERSION_HPP

namespace pathctrl {

inline constexpr const char* library_version = "0.1.0";

} // namespace pathctrl

#endif
