#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "mobcl/model/net.hpp"

namespace mobcl {

/// Versioned binary container: magic + JSON config + named double tensors.
/// Loading rebuilds the network from the embedded config and validates
/// every tensor shape against it.
void save_checkpoint(const Network& model, std::ostream& out);
std::shared_ptr<Network> load_checkpoint(std::istream& in);

void save_checkpoint_file(const Network& model, const std::string& path);
std::shared_ptr<Network> load_checkpoint_file(const std::string& path);

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& json_text);

}  // namespace mobcl
