/**
 * @file error.h
 * @brief Exception type thrown by every hmax module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace hmax {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hmax
