#pragma once

#include <stdexcept>
#include <string>

namespace mesochain {

// Base for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

// Two particles at the same position, or an otherwise unusable geometry.
class DegenerateGeometryError : public Error
{
public:
  using Error::Error;
};

// Particle ordering was lost during time stepping.
class BlowUpError : public Error
{
public:
  using Error::Error;
};

class EmptyCellError : public Error
{
public:
  using Error::Error;
};

class GridMismatchError : public Error
{
public:
  using Error::Error;
};

class NearVacuumError : public Error
{
public:
  using Error::Error;
};

class ReconstructionError : public Error
{
public:
  using Error::Error;
};

class InfeasiblePrescriptionError : public Error
{
public:
  InfeasiblePrescriptionError(const std::string& what, double deficit)
    : Error(what)
    , deficit_(deficit)
  {}

  // Amount of energy missing to make the prescription feasible (> 0).
  double deficit() const { return deficit_; }

private:
  double deficit_;
};

class CflError : public Error
{
public:
  using Error::Error;
};

class NegativeDensityError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace mesochain
