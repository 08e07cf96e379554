#include "certiscope/parallel.hpp"

#include <cstdlib>
#include <string>

namespace certiscope {

unsigned worker_count() {
  if (const char* env = std::getenv("CERTISCOPE_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace certiscope
