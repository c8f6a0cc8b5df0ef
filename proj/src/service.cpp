#include "discursive/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <json.hpp>

#include "discursive/error.hpp"
#include "discursive/io.hpp"
#include "discursive/landscape.hpp"

namespace discursive::service {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

Response json_response(int status, const json& body) {
  return {status, "application/json", body.dump(2) + "\n"};
}

Response error_response(int status, std::string_view message) {
  return json_response(status, {{"schema_version", bundle::kSchemaVersion},
                                {"status", status},
                                {"error", std::string(message)}});
}

// Parses a real query parameter; nullopt when absent, throws when malformed.
std::optional<double> real_param(const Query& query, const std::string& name) {
  auto it = query.find(name);
  if (it == query.end()) return std::nullopt;
  const double value = io::parse_double(it->second);
  if (!std::isfinite(value)) throw Error(ErrorCode::ParseError, name + " is not finite");
  return value;
}

// Closest grid value; the smaller one wins an exact tie.
double snap(const std::vector<double>& grid, double wanted) {
  double best = grid.front();
  for (double value : grid) {
    const double d = std::abs(value - wanted);
    const double best_d = std::abs(best - wanted);
    // distances within rounding of each other are a tie; the smaller value wins
    const bool tie = std::abs(d - best_d) <= 1e-12;
    if ((!tie && d < best_d) || (tie && value < best)) best = value;
  }
  return best;
}

std::string_view content_type_for(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

constexpr std::string_view kPlaceholderPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>discursive</title></head>\n"
    "<body><h1>discursive</h1><p>The explorer is not installed. API endpoints:</p><ul>\n"
    "<li><a href=\"/api/landscape\">/api/landscape</a></li>\n"
    "<li><a href=\"/api/topics\">/api/topics</a></li>\n"
    "<li>/api/topics/{t}/speeches?threshold=</li>\n"
    "<li>/api/speech/{id}</li>\n"
    "<li><a href=\"/api/network\">/api/network?level=&amp;resolution=&amp;mode=</a></li>\n"
    "</ul></body></html>\n";

}  // namespace

Service::Service(const fs::path& bundle_dir, std::optional<fs::path> static_dir)
    : static_dir_(std::move(static_dir)) {
  try {
    bundle_ = std::make_shared<const bundle::LoadedBundle>(bundle::load_bundle(bundle_dir));
  } catch (const Error& e) {
    load_error_ = e.what();
  }
}

Response Service::handle(std::string_view method, std::string_view path, const Query& query) const {
  const bool api = path == "/api" || path.starts_with("/api/");
  if (method != "GET" && method != "HEAD") return error_response(405, "read-only service");
  if (!api) return static_file(path);
  if (!bundle_) return error_response(409, load_error_);

  try {
    if (path == "/api/landscape") return landscape();
    if (path == "/api/topics") return topics();
    if (path == "/api/network") return network(query);
    constexpr std::string_view topics_prefix = "/api/topics/";
    constexpr std::string_view speeches_suffix = "/speeches";
    if (path.starts_with(topics_prefix) && path.ends_with(speeches_suffix) &&
        path.size() > topics_prefix.size() + speeches_suffix.size()) {
      auto topic = path.substr(topics_prefix.size(),
                               path.size() - topics_prefix.size() - speeches_suffix.size());
      return topic_speeches(topic, query);
    }
    constexpr std::string_view speech_prefix = "/api/speech/";
    if (path.starts_with(speech_prefix) && path.size() > speech_prefix.size()) {
      return speech(path.substr(speech_prefix.size()));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidArgument) {
      return error_response(400, e.what());
    }
    return error_response(500, e.what());
  }
  return error_response(404, "no such endpoint: " + std::string(path));
}

Response Service::landscape() const { return {200, "application/json", bundle_->landscape_json}; }

Response Service::topics() const { return {200, "application/json", bundle_->topics_json}; }

Response Service::topic_speeches(std::string_view topic_text, const Query& query) const {
  long long topic = 0;
  try {
    topic = io::parse_int(topic_text);
  } catch (const Error&) {
    return error_response(400, "topic must be an integer");
  }
  if (topic < 0 || topic >= bundle_->num_topics) {
    return error_response(404, "unknown topic " + std::string(topic_text));
  }
  const double threshold = real_param(query, "threshold").value_or(bundle_->prominence);
  if (threshold < 0.0 || threshold > 1.0) return error_response(400, "threshold must be in [0, 1]");

  const auto speeches = landscape::prominent_speeches(bundle_->model, bundle_->corpus,
                                                      static_cast<int>(topic), threshold);
  json list = json::array();
  for (const auto& s : speeches) {
    const auto* record = bundle_->corpus.find(s.speech_id);
    list.push_back({{"id", s.speech_id},
                    {"score", s.score},
                    {"speaker_name", record->speaker_name},
                    {"affiliation", record->affiliation},
                    {"date", record->date.to_string()}});
  }
  return json_response(200, {{"schema_version", bundle::kSchemaVersion},
                             {"topic", topic},
                             {"label", landscape::topic_label(static_cast<std::size_t>(topic))},
                             {"threshold", threshold},
                             {"speeches", list}});
}

Response Service::speech(std::string_view id) const {
  const auto* record = bundle_->corpus.find(id);
  if (!record) return error_response(404, "unknown speech " + std::string(id));
  json topic_scores = nullptr;
  const auto row = bundle_->model.doc_index(id);
  if (row >= 0) {
    auto theta = bundle_->model.theta_row(static_cast<std::size_t>(row));
    topic_scores = std::vector<double>(theta.begin(), theta.end());
  }
  json reason = nullptr;
  if (record->excluded) reason = std::string(corpus::to_string(*record->excluded));
  return json_response(200, {{"schema_version", bundle::kSchemaVersion},
                             {"id", record->id},
                             {"protocol_id", record->protocol_id},
                             {"date", record->date.to_string()},
                             {"year", record->year},
                             {"speaker_name", record->speaker_name},
                             {"affiliation", record->affiliation},
                             {"excluded", record->excluded.has_value()},
                             {"exclusion_reason", reason},
                             {"topic_scores", topic_scores},
                             {"text", record->text}});
}

Response Service::network(const Query& query) const {
  std::string mode = "bipartite";
  if (auto it = query.find("mode"); it != query.end()) mode = it->second;
  if (mode != "bipartite" && mode != "projection") {
    return error_response(400, "mode must be bipartite or projection");
  }
  const auto level_q = real_param(query, "level");
  const auto resolution_q = real_param(query, "resolution");
  const double level = snap(bundle_->levels, level_q.value_or(bundle_->levels.front()));
  const double resolution =
      snap(bundle_->resolutions, resolution_q.value_or(bundle_->resolutions.front()));
  const auto& graph = bundle_->networks.at({mode, level, resolution});

  json requested = json::object();
  if (level_q) requested["level"] = *level_q;
  if (resolution_q) requested["resolution"] = *resolution_q;
  return json_response(
      200, {{"schema_version", bundle::kSchemaVersion},
            {"mode", mode},
            {"requested", requested},
            {"served", {{"level", level}, {"resolution", resolution}}},
            {"available", {{"levels", bundle_->levels}, {"resolutions", bundle_->resolutions}}},
            {"graph", json::parse(netgraph::export_graph(graph, netgraph::GraphFormat::Json))}});
}

Response Service::static_file(std::string_view path) const {
  if (!static_dir_) {
    if (path == "/" || path == "/index.html") {
      return {200, "text/html; charset=utf-8", std::string(kPlaceholderPage)};
    }
    return error_response(404, "not found");
  }
  std::string relative = path == "/" ? "index.html" : std::string(path.substr(1));
  const fs::path requested = fs::path(relative).lexically_normal();
  if (requested.empty() || requested.is_absolute() || *requested.begin() == "..") {
    return error_response(404, "not found");
  }
  const fs::path full = *static_dir_ / requested;
  if (!fs::is_regular_file(full)) return error_response(404, "not found");
  return {200, std::string(content_type_for(full)), io::read_file(full)};
}

int resolve_port(int fallback) {
  const char* env = std::getenv("DISCURSIVE_PORT");
  if (!env) return fallback;
  try {
    const auto port = io::parse_int(env);
    if (port > 0 && port < 65536) return static_cast<int>(port);
  } catch (const Error&) {
  }
  return fallback;
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>()) {
  auto adapter = [&service](const httplib::Request& req, httplib::Response& res) {
    Query query;
    for (const auto& [key, value] : req.params) query.emplace(key, value);
    const auto response = service.handle(req.method, req.path, query);
    res.status = response.status;
    res.set_header("Cache-Control", "public, max-age=3600");
    res.set_content(response.body, response.content_type);
  };
  impl_->server.Get(".*", adapter);
  impl_->server.Post(".*", adapter);
  impl_->server.Put(".*", adapter);
  impl_->server.Delete(".*", adapter);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

bool HttpServer::running() const { return impl_->server.is_running(); }

bool run_server(const Service& service, const std::string& host, int port) {
  HttpServer server(service);
  if (server.bind(host, port) < 0) return false;
  return server.listen();
}

}  // namespace discursive::service
