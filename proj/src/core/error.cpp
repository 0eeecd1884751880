#include "core/error.hpp"

namespace vicloud {

void throw_config(const std::string& message) { throw Error(ErrorKind::config, message); }
void throw_data(const std::string& message) { throw Error(ErrorKind::data, message); }
void throw_numeric(const std::string& message) { throw Error(ErrorKind::numeric, message); }

}  // namespace vicloud
