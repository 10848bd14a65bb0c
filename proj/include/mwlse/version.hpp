#ifndef MWLSE_VERSION_HPP
#define MWLSE_VERSION_HPP

namespace mwlse {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
