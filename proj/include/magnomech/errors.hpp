#pragma once

#include <stdexcept>
#include <string>

namespace magnomech
{
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error
{
public:
    using Error::Error;
};

// 2x2 steady-state determinant vanished (zero losses at an exact normal-mode drive).
class SingularSystem : public Error
{
public:
    using Error::Error;
};

class NoRoot : public Error
{
public:
    using Error::Error;
};

class GridError : public Error
{
public:
    using Error::Error;
};

class BadWindow : public Error
{
public:
    using Error::Error;
};

class DegenerateDesign : public Error
{
public:
    using Error::Error;
};

class NegativeCouplingSquare : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};
}  // namespace magnomech
