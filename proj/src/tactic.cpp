#include "qdl/tactic.hpp"
