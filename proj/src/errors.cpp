#include "gedecomp/errors.hpp"

#include <utility>

namespace gedecomp {

NodeError::NodeError(std::string node, std::string file, const std::string& what)
    : std::runtime_error("node '" + node + "'" + (file.empty() ? "" : " (" + file + ")") + ": " + what),
      node_(std::move(node)),
      file_(std::move(file)) {}

IoError::IoError(std::string path, const std::string& what)
    : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

}  // namespace gedecomp
