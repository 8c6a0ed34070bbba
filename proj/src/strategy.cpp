#include "qdl/strategy.hpp"
