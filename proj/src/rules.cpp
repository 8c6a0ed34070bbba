#include "qdl/rules.hpp"
