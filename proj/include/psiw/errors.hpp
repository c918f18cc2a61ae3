#ifndef PSIW_ERRORS_HPP
#define PSIW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace psiw
{

// Argument outside the domain of the requested operation or branch.
class domain_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Intermediate exponentials would leave the binary64 range.
class range_error : public std::range_error
{
public:
    using std::range_error::range_error;
};

// The requested branch family or operation is not available for the parameter category.
class unsupported_error : public domain_error
{
public:
    using domain_error::domain_error;
};

// |f'(w)| vanished (evaluation at or numerically on top of a critical point).
class singularity_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// An iterative solve or a path continuation did not reach its tolerance.
class convergence_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace psiw

#endif
