#include "roadnav/common/error.h"
#include "roadnav/navigation/navigation.h"

namespace roadnav::nav {

JunctionCounter::JunctionCounter(int m, int n) : rise(m), rearm(n) {
  if (m < 1 || n < 1) throw InvalidInput("junction counter: M and N must be >= 1");
}

bool JunctionCounter::update(bool flag) {
  if (armed) {
    consecutive_neg = 0;
    if (!flag) {
      consecutive_pos = 0;
      return false;
    }
    if (++consecutive_pos < rise) return false;
    ++count;
    armed = false;
    consecutive_pos = 0;
    return true;
  }
  consecutive_pos = 0;
  if (flag) {
    consecutive_neg = 0;
    return false;
  }
  if (++consecutive_neg >= rearm) {
    armed = true;
    consecutive_neg = 0;
  }
  return false;
}

}  // namespace roadnav::nav
