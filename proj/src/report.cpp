#include "qdl/report.hpp"
