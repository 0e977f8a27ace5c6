// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sparsetrim {

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when on-disk data (manifest, blob, lexicon, config) is malformed.
class FormatError : public Error
{
public:
    using Error::Error;
};

/// Raised when a caller violates an operation's precondition.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

} // namespace sparsetrim
