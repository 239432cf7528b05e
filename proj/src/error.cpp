// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/error.hpp"

namespace amgs {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::io: return "io";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::sampling: return "sampling";
        case ErrorKind::encoding: return "encoding";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::inner_loop: return "inner_loop";
    }
    return "unknown";
}

}  // namespace amgs
