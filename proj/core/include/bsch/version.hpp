#ifndef BSCH_VERSION_HPP
#define BSCH_VERSION_HPP

namespace bsch {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
