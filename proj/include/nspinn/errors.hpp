#pragma once

#include <stdexcept>

namespace nspinn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nspinn
