#include "entprop/errors.hpp"

namespace entprop {

Error::Error(std::string_view code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

}  // namespace entprop
