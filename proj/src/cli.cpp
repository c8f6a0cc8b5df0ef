#include "discursive/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include "discursive/bundle.hpp"
#include "discursive/corpus.hpp"
#include "discursive/error.hpp"
#include "discursive/io.hpp"
#include "discursive/landscape.hpp"
#include "discursive/modelselect.hpp"
#include "discursive/netgraph.hpp"
#include "discursive/service.hpp"
#include "discursive/textprep.hpp"
#include "discursive/topicmodel.hpp"

namespace discursive::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// One line naming the tool, the stage and every setting that shaped the
// artifact. Input paths are left out so that identical inputs in different
// directories give identical artifacts.
std::string provenance(std::string_view command, const json& settings) {
  return std::string("discursive ") + kVersion + " " + std::string(command) + " " + settings.dump();
}

struct LdaOptions {
  int k = 10;
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 200;
  int average_last = 0;
  std::uint64_t seed = topicmodel::kDefaultSeed;

  void add_to(CLI::App* app, bool with_k) {
    if (with_k) app->add_option("--k", k, "number of topics")->capture_default_str();
    app->add_option("--alpha", alpha, "doc-topic prior (default 50/k)");
    app->add_option("--beta", beta, "topic-word prior")->capture_default_str();
    app->add_option("--iterations", iterations, "Gibbs sweeps")->capture_default_str();
    app->add_option("--burn-in", burn_in)->capture_default_str();
    app->add_option("--average-last", average_last, "average estimates over the last m sweeps")
        ->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
  }

  topicmodel::LdaConfig config() const {
    topicmodel::LdaConfig c;
    c.k = k;
    c.alpha = alpha;
    c.beta = beta;
    c.iterations = iterations;
    c.burn_in = burn_in;
    c.average_last_m = average_last;
    c.seed = seed;
    return c;
  }
};

struct NetworkOptions {
  std::vector<double> levels{0.15, 0.25};
  std::vector<double> resolutions{0.33, 1.0};
  bool keep_isolates = false;
  bool global_max = false;
  std::string normalization = "max";
  std::string projection = "dot";
  std::uint64_t seed = topicmodel::kDefaultSeed;

  void add_to(CLI::App* app) {
    app->add_option("--level", levels, "assignment levels in (0, 1]")->capture_default_str();
    app->add_option("--resolution", resolutions, "community resolutions > 0")->capture_default_str();
    app->add_flag("--keep-isolates", keep_isolates, "keep nodes left without edges");
    app->add_flag("--global-max", global_max, "filter against the overall maximum weight");
    app->add_option("--normalization", normalization, "centrality reference")
        ->check(CLI::IsMember({"max", "sum"}))
        ->capture_default_str();
    app->add_option("--projection", projection, "projection edge weight")
        ->check(CLI::IsMember({"dot", "cooccurrence", "min"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "community detection seed")->capture_default_str();
  }

  bundle::BundleConfig config() const {
    bundle::BundleConfig c;
    c.levels = levels;
    c.resolutions = resolutions;
    c.seed = seed;
    c.remove_isolates = !keep_isolates;
    c.global_max = global_max;
    c.normalization = normalization == "sum" ? netgraph::CentralityNorm::Sum : netgraph::CentralityNorm::Max;
    c.projection = projection == "cooccurrence" ? netgraph::ProjectionWeight::CoOccurrence
                   : projection == "min"        ? netgraph::ProjectionWeight::MinWeight
                                                : netgraph::ProjectionWeight::DotProduct;
    return c;
  }

  json settings() const {
    return {{"levels", levels},          {"resolutions", resolutions}, {"isolates_removed", !keep_isolates},
            {"global_max", global_max},  {"normalization", normalization},
            {"projection", projection},  {"seed", seed}};
  }
};

corpus::Corpus read_corpus(const fs::path& path) {
  return corpus::corpus_from_speeches(corpus::speeches_from_jsonl(io::read_file(path)));
}

void write_corpus(const corpus::BuildResult& result, const fs::path& dir, const std::string& prov) {
  io::ensure_directory(dir);
  io::write_file(dir / "corpus.jsonl", corpus::to_jsonl(result.corpus.speeches));
  io::write_file(dir / "corpus.meta.json",
                 json{{"schema_version", 1}, {"provenance", prov}}.dump(2) + "\n");
  auto stats = json::parse(corpus::stats_to_json(result.stats));
  stats["provenance"] = prov;
  io::write_file(dir / "stats.json", stats.dump(2) + "\n");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"discursive: from meeting protocols to topic landscapes and speaker networks",
               "discursive"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse protocol files into a speech corpus");
  fs::path protocols_dir, overrides_path, ingest_out;
  std::vector<std::string> agendas;
  std::string window_from, window_to;
  ingest->add_option("--protocols", protocols_dir, "directory of protocol files")->required();
  ingest->add_option("--overrides", overrides_path, "'Name | Affiliation' lines");
  ingest->add_option("--agenda", agendas, "accepted agenda labels");
  ingest->add_option("--from", window_from, "first accepted date YYYY-MM-DD");
  ingest->add_option("--to", window_to, "last accepted date YYYY-MM-DD");
  ingest->add_option("--out", ingest_out, "output directory")->required();

  // prep
  auto* prep = app.add_subcommand("prep", "tokenize, prune and vectorize the included speeches");
  fs::path prep_corpus, stopwords_path, prep_out;
  textprep::PrepConfig prep_config;
  prep->add_option("--corpus", prep_corpus, "corpus.jsonl")->required();
  prep->add_option("--stopwords", stopwords_path, "stop-word file, one per line");
  prep->add_option("--min-count", prep_config.min_count, "drop terms seen fewer times")
      ->capture_default_str();
  prep->add_option("--min-token-len", prep_config.min_token_len)->capture_default_str();
  prep->add_flag("--keep-numeric", prep_config.keep_numeric, "keep digit tokens");
  prep->add_option("--out", prep_out, "matrix directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit an LDA model by collapsed Gibbs sampling");
  fs::path fit_matrix, fit_out;
  LdaOptions fit_lda;
  fit->add_option("--matrix", fit_matrix, "matrix directory")->required();
  fit->add_option("--out", fit_out, "model directory")->required();
  fit_lda.add_to(fit, true);

  // select-k
  auto* select = app.add_subcommand("select-k", "scan k and pick the first local peak");
  fs::path select_matrix, select_out;
  int kmin = 2, kmax = 25;
  std::optional<std::size_t> top_n;
  bool sequential = false;
  LdaOptions select_lda;
  select->add_option("--matrix", select_matrix, "matrix directory")->required();
  select->add_option("--kmin", kmin)->capture_default_str();
  select->add_option("--kmax", kmax)->capture_default_str();
  select->add_option("--top-n", top_n, "restrict each topic to its top n words");
  select->add_flag("--sequential", sequential, "fit candidate models one at a time");
  select->add_option("--out", select_out, "directory for scan.csv and scan.json");
  select_lda.add_to(select, false);

  // landscape
  auto* land = app.add_subcommand("landscape", "yearly dominant-topic shares and rank table");
  fs::path land_corpus, land_model, land_out;
  double rank_threshold = 0.5;
  land->add_option("--corpus", land_corpus)->required();
  land->add_option("--model", land_model)->required();
  land->add_option("--rank-threshold", rank_threshold, "cumulative share covered per year")
      ->capture_default_str();
  land->add_option("--out", land_out)->required();

  // network
  auto* net = app.add_subcommand("network", "speaker-topic networks, projections, communities");
  fs::path net_corpus, net_model, net_out;
  std::vector<std::string> formats{"gexf", "json"};
  NetworkOptions net_options;
  net->add_option("--corpus", net_corpus)->required();
  net->add_option("--model", net_model)->required();
  net->add_option("--out", net_out)->required();
  net->add_option("--format", formats, "gexf, json, csv")->capture_default_str();
  net_options.add_to(net);

  // bundle
  auto* bun = app.add_subcommand("bundle", "assemble the explorer bundle");
  fs::path bun_corpus, bun_model, bun_stats, bun_scan, bun_out;
  NetworkOptions bun_options;
  double bun_rank_threshold = 0.5;
  double prominence = landscape::kProminenceThreshold;
  bun->add_option("--corpus", bun_corpus)->required();
  bun->add_option("--model", bun_model)->required();
  bun->add_option("--stats", bun_stats, "stats.json from ingest");
  bun->add_option("--scan", bun_scan, "scan.json from select-k");
  bun->add_option("--rank-threshold", bun_rank_threshold)->capture_default_str();
  bun->add_option("--prominence", prominence, "topic score a speech must exceed")
      ->capture_default_str();
  bun->add_option("--out", bun_out)->required();
  bun_options.add_to(bun);

  // serve
  auto* serve = app.add_subcommand("serve", "serve a bundle over HTTP (read-only)");
  fs::path serve_bundle, static_dir;
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--bundle", serve_bundle)->required();
  serve->add_option("--port", port, "overridden by DISCURSIVE_PORT")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--static", static_dir, "explorer build directory");

  std::vector<const char*> argv{"discursive"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code_for(ErrorCode::InvalidArgument);
  }

  try {
    if (*ingest) {
      corpus::AffiliationOverrides overrides;
      if (!overrides_path.empty()) {
        overrides = corpus::AffiliationOverrides::parse(io::read_file(overrides_path));
      }
      corpus::CorpusConfig config;
      if (!agendas.empty()) config.accepted_agendas = {agendas.begin(), agendas.end()};
      auto date_option = [](const std::string& text) {
        auto date = corpus::Date::parse(text);
        if (!date) throw Error(ErrorCode::InvalidArgument, "not a YYYY-MM-DD date: " + text);
        return *date;
      };
      if (!window_from.empty()) config.window_start = date_option(window_from);
      if (!window_to.empty()) config.window_end = date_option(window_to);
      auto result = corpus::build_corpus(corpus::list_protocol_files(protocols_dir), overrides, config);
      for (const auto& failure : result.stats.failures) {
        err << "warning: skipped " << failure.file << ": " << failure.error << "\n";
      }
      json settings{{"agendas", config.accepted_agendas},
                    {"from", window_from},
                    {"to", window_to},
                    {"overrides", overrides.size()}};
      write_corpus(result, ingest_out, provenance("ingest", settings));
      out << "protocols: " << result.stats.protocol_count << "\n"
          << "speeches: " << result.stats.speech_count << " (included " << result.stats.included_count
          << ")\n";
      return 0;
    }

    if (*prep) {
      if (!stopwords_path.empty()) prep_config.stopwords = textprep::load_stopwords(stopwords_path);
      prep_config.validate();
      const auto corpus = read_corpus(prep_corpus);
      std::vector<textprep::Document> docs;
      std::vector<std::vector<std::string>> token_lists;
      for (const auto* speech : corpus.included()) {
        docs.push_back({speech->id, textprep::preprocess_speech(speech->text, prep_config)});
        token_lists.push_back(docs.back().tokens);
      }
      const auto vocabulary = textprep::build_vocabulary(token_lists, prep_config);
      const auto dtm = textprep::vectorize(docs, vocabulary);
      json settings{{"min_count", prep_config.min_count},
                    {"min_token_len", prep_config.min_token_len},
                    {"keep_numeric", prep_config.keep_numeric},
                    {"stopwords", prep_config.stopwords.size()}};
      textprep::save_matrix(dtm, prep_out, provenance("prep", settings));
      out << "documents: " << dtm.num_docs() << " (dropped " << dtm.dropped_docs.size() << ")\n"
          << "terms: " << dtm.num_terms() << "\n";
      return 0;
    }

    if (*fit) {
      const auto config = fit_lda.config();
      config.validate();
      const auto dtm = textprep::load_matrix(fit_matrix);
      const auto model = topicmodel::fit_lda(dtm, config);
      json settings = {{"k", config.k}, {"alpha", config.resolved_alpha()}, {"beta", config.beta},
                       {"iterations", config.iterations}, {"burn_in", config.burn_in},
                       {"average_last_m", config.average_last_m}, {"seed", config.seed}};
      topicmodel::save_model(model, fit_out, provenance("fit", settings));
      out << "log-likelihood: " << io::format_double(topicmodel::log_likelihood(model, dtm)) << "\n";
      return 0;
    }

    if (*select) {
      if (kmin < 2 || kmax < kmin) {
        throw Error(ErrorCode::InvalidArgument, "need 2 <= kmin <= kmax");
      }
      auto base = select_lda.config();
      base.k = kmin;
      base.validate();
      std::vector<int> ks;
      for (int k = kmin; k <= kmax; ++k) ks.push_back(k);
      modelselect::ScanOptions options;
      options.deveaud.top_n = top_n;
      options.parallel = !sequential;
      const auto dtm = textprep::load_matrix(select_matrix);
      const auto scan = modelselect::scan_k(dtm, ks, base, options);
      for (const auto& failure : scan.failures) {
        err << "warning: k=" << failure.k << " failed: " << failure.error << "\n";
      }
      const int chosen = modelselect::select_first_local_peak(scan);
      if (!select_out.empty()) {
        json settings{{"kmin", kmin},          {"kmax", kmax},
                      {"beta", base.beta},     {"iterations", base.iterations},
                      {"burn_in", base.burn_in}, {"seed", base.seed}};
        if (base.alpha) settings["alpha"] = *base.alpha;
        if (top_n) settings["top_n"] = *top_n;
        io::ensure_directory(select_out);
        io::write_file(select_out / "scan.csv",
                       modelselect::scan_to_csv(scan, chosen, provenance("select-k", settings)));
        auto scan_json = json::parse(modelselect::scan_to_json(scan, chosen));
        scan_json["provenance"] = provenance("select-k", settings);
        io::write_file(select_out / "scan.json", scan_json.dump(2) + "\n");
      }
      for (std::size_t i = 0; i < scan.k_values.size(); ++i) {
        out << "k=" << scan.k_values[i] << " score=" << io::format_double(scan.scores[i]) << "\n";
      }
      out << "chosen k = " << chosen << "\n";
      return 0;
    }

    if (*land) {
      const auto corpus = read_corpus(land_corpus);
      const auto model = topicmodel::load_model(land_model);
      const auto series = landscape::yearly_shares(corpus, model);
      const auto table = landscape::rank_table(series, rank_threshold);
      const auto prov = provenance("landscape", {{"rank_threshold", rank_threshold},
                                                 {"k", model.config.k},
                                                 {"seed", model.config.seed}});
      io::ensure_directory(land_out);
      io::write_file(land_out / "landscape.json",
                     landscape::landscape_to_json(series, table, model, prov));
      io::write_file(land_out / "shares.csv",
                     io::comment_block(prov) + landscape::shares_to_csv(series));
      io::write_file(land_out / "rank_table.csv",
                     io::comment_block(prov) + landscape::rank_table_to_csv(table));
      if (!series.unmodelled.empty()) {
        err << "warning: " << series.unmodelled.size() << " included speeches have no model row\n";
      }
      out << "years: " << series.years.size() << "\n";
      return 0;
    }

    if (*net) {
      std::vector<netgraph::GraphFormat> parsed;
      for (const auto& f : formats) parsed.push_back(netgraph::parse_format(f));
      const auto config = net_options.config();
      config.validate();
      const auto corpus = read_corpus(net_corpus);
      const auto model = topicmodel::load_model(net_model);
      const auto graph = netgraph::build_bipartite(landscape::speaker_topic_weights(corpus, model));
      io::ensure_directory(net_out);
      for (double level : config.levels) {
        const auto view = netgraph::filter_edges(graph, level, config.remove_isolates, config.global_max);
        const auto projection = netgraph::project_one_mode(view, config.projection);
        for (double resolution : config.resolutions) {
          const auto bip = netgraph::make_bipartite_bundle(view, resolution, config.seed,
                                                           config.normalization);
          const auto one = netgraph::make_projection_bundle(view, projection, resolution,
                                                            config.seed, config.normalization);
          for (std::size_t i = 0; i < parsed.size(); ++i) {
            const std::string ext = "." + formats[i];
            netgraph::export_graph(bip, parsed[i],
                                   net_out / (bundle::network_stem("bipartite", level, resolution) + ext));
            netgraph::export_graph(one, parsed[i],
                                   net_out / (bundle::network_stem("projection", level, resolution) + ext));
          }
          out << "level=" << io::format_double(level) << " resolution=" << io::format_double(resolution)
              << " bipartite communities=" << bip.meta.communities
              << " projection communities=" << one.meta.communities << "\n";
        }
      }
      return 0;
    }

    if (*bun) {
      auto config = bun_options.config();
      config.rank_threshold = bun_rank_threshold;
      config.prominence = prominence;
      config.validate();
      bundle::BundleInputs inputs;
      inputs.corpus = read_corpus(bun_corpus);
      inputs.model = topicmodel::load_model(bun_model);
      if (!bun_stats.empty()) inputs.stats_json = io::read_file(bun_stats);
      if (!bun_scan.empty()) inputs.scan_json = io::read_file(bun_scan);
      auto settings = bun_options.settings();
      settings["rank_threshold"] = bun_rank_threshold;
      settings["prominence"] = prominence;
      settings["k"] = inputs.model.config.k;
      settings["lda_seed"] = inputs.model.config.seed;
      inputs.provenance = provenance("bundle", settings);
      bundle::write_bundle(inputs, config, bun_out);
      bundle::load_bundle(bun_out);
      out << "bundle written: " << bun_out.string() << "\n";
      return 0;
    }

    if (*serve) {
      service::Service svc(serve_bundle, static_dir.empty() ? std::nullopt
                                                            : std::optional<fs::path>(static_dir));
      if (!svc.ok()) err << "warning: bundle failed validation, /api answers 409: " << svc.load_error() << "\n";
      const int effective = service::resolve_port(port);
      out << "serving " << serve_bundle.string() << " on http://" << host << ":" << effective << "/\n"
          << std::flush;
      if (!service::run_server(svc, host, effective)) {
        throw Error(ErrorCode::IoFailure, "cannot listen on " + host + ":" + std::to_string(effective));
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace discursive::cli
