#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "copilot/provider.hpp"
#include "copilot/schema.hpp"

namespace copilot {

using nlohmann::json;

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const auto& base = config_.api_base;
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::invalid_config, "MODEL_API_BASE must start with http:// or https://");
  }
  const auto path_start = base.find('/', scheme_end + 3);
  scheme_host_port_ = base.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (config_.model.empty()) throw Error(ErrorCode::invalid_config, "MODEL_NAME is empty");
}

json HttpProvider::build_body(const ProviderRequest& request, const std::vector<std::string>& repair_notes) const {
  const auto schema_id = request.schema_id.empty() ? std::string(schema_for(request.agent)) : request.schema_id;
  std::string system = prompt_template(std::string(to_string(request.agent)), config_.config_dir);
  if (const auto* schema = SchemaRegistry::builtin().find(schema_id)) {
    system += "\nThe reply must validate against this JSON schema:\n" + schema->dump();
  }
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", system}});
  messages.push_back({{"role", "user"}, {"content", request.context.dump()}});
  for (const auto& note : repair_notes) messages.push_back({{"role", "user"}, {"content", note}});
  return {{"model", config_.model},
          {"messages", std::move(messages)},
          {"temperature", 0},
          {"response_format", {{"type", "json_object"}}}};
}

std::string HttpProvider::complete(const ProviderRequest& request, const std::vector<std::string>& repair_notes,
                                   Millis timeout_ms) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = static_cast<time_t>(timeout_ms / 1000);
  const auto micros = static_cast<time_t>((timeout_ms % 1000) * 1000);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto body = build_body(request, repair_notes).dump();
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
      throw ProviderFailure(FailureClass::timeout, "model endpoint: " + httplib::to_string(err));
    }
    throw ProviderFailure(FailureClass::transport, "model endpoint: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw ProviderFailure(FailureClass::transport,
                          "model endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    // The envelope itself is broken, not the model's text: a transport problem.
    throw ProviderFailure(FailureClass::transport, std::string("unexpected completion envelope: ") + e.what());
  }
}

}  // namespace copilot
