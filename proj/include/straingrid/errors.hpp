/*
* Copyright (C) 2026 The straingrid authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace straingrid
{

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, violated preconditions, bad config values.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// A patch with beta <= r + gamma. The endemic equilibrium does not exist there.
class SubcriticalPatch : public Error
{
public:
    SubcriticalPatch(std::size_t patch, const std::string& what)
        : Error(what)
        , patch_(patch)
    {
    }
    std::size_t patch() const noexcept
    {
        return patch_;
    }

private:
    std::size_t patch_;
};

/// Step size underflow or step budget exhausted in the explicit integrator.
class StiffnessFailure : public Error
{
public:
    StiffnessFailure(double t, double h, const std::string& what)
        : Error(what)
        , t_(t)
        , h_(h)
    {
    }
    double time() const noexcept
    {
        return t_;
    }
    double step() const noexcept
    {
        return h_;
    }

private:
    double t_;
    double h_;
};

/// The right-hand side produced a NaN or infinity.
class NumericalBlowup : public Error
{
public:
    NumericalBlowup(double t, const std::string& what)
        : Error(what)
        , t_(t)
    {
    }
    double time() const noexcept
    {
        return t_;
    }

private:
    double t_;
};

/// All strains vanished from a patch, so frequencies are undefined there.
class ExtinctPatch : public Error
{
public:
    ExtinctPatch(std::size_t patch, const std::string& what)
        : Error(what)
        , patch_(patch)
    {
    }
    std::size_t patch() const noexcept
    {
        return patch_;
    }

private:
    std::size_t patch_;
};

} // namespace straingrid
