#pragma once

#include <stdexcept>
#include <string>

namespace dielsphere
{

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Evaluation point lies on (or within rounding of) a singular set of the
/// requested function or basis.
class singularity_error : public domain_error
{
public:
    using domain_error::domain_error;
};

/// An iterative or adaptive procedure failed to reach its tolerance.
class convergence_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A reference used for error diagnostics is itself not converged.
class diagnostics_error : public convergence_error
{
public:
    using convergence_error::convergence_error;
};

} // namespace dielsphere
