#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "fraudscore/bundle.hpp"
#include "fraudscore/error.hpp"

namespace fraudscore::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string records_text(const std::vector<bundle::Record>& records) {
  std::ostringstream out;
  bundle::write_records(out, records);
  return out.str();
}

// Runs body(i) for i in [0, n) on up to `jobs` threads. Results must be
// written by index so the outcome does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

data::FraudGenConfig fraud_config_for(const TransactionSequence& stream, const FraudOptions& o) {
  if (stream.size() < o.train_len) {
    throw Error(ErrorKind::InsufficientLegitimateData, "stream shorter than the training window");
  }
  const auto amounts = stream.slice(0, o.train_len).amounts();
  auto config = data::FraudGenConfig::from_legitimate(amounts, o.block_len);
  if (o.mean) config.amount_mean = *o.mean;
  if (o.std) config.amount_std = *o.std;
  config.distribution = o.distribution;
  config.validate();
  return config;
}

json config_json(const ModelConfig& c) {
  json j;
  j["p"] = c.p;
  j["d"] = c.d;
  j["sd_multiplier"] = c.sd_multiplier;
  j["theta_ev"] = c.theta_ev;
  j["theta_xy"] = c.theta_xy;
  j["window"] = c.window ? json(*c.window) : json(nullptr);
  j["row_len"] = c.row_len;
  j["seed"] = c.seed;
  j["lag_padding"] = c.lag_padding == LagPadding::Drop ? "drop" : "zero";
  j["evp_side"] = c.evp_side == EvpSide::Folded ? "folded" : "upper";
  j["refit"] = c.refit == RefitPolicy::Step ? "step" : "once";
  j["center"] = c.center;
  j["gp_restarts"] = c.gp_restarts;
  j["gp_max_iter"] = c.gp_max_iter;
  j["gp_tolerance"] = c.gp_tolerance;
  return j;
}

json fraud_json(const data::FraudGenConfig& f, const FraudOptions& o) {
  json j;
  j["amount_mean"] = f.amount_mean;
  j["amount_std"] = f.amount_std;
  j["block_len"] = f.block_len;
  j["distribution"] =
      f.distribution == data::FraudDistribution::TruncatedNormal ? "truncnorm" : "lognormal";
  j["datasets"] = o.datasets;
  j["train_len"] = o.train_len;
  return j;
}

std::string method_file_stem(const MethodResult& m) {
  return m.name + "_" + std::string(detect::to_string(m.amount_model)) + "_" +
         std::string(detect::to_string(m.region_model));
}

std::string plot_text(const data::Dataset& ds, const detect::AmountTrack& track,
                      const ModelConfig& config) {
  const auto sd_flags = detect::outlier_flags(track, detect::OutlierMode::Sd, config);
  const auto evp_flags = detect::outlier_flags(track, detect::OutlierMode::Evp, config);
  std::ostringstream out;
  out << "# fraudscore-plot v1\n"
      << "index,split,log_amount,mean,lower,upper,upper_1sd,evp,flag_sd,flag_evp\n";
  for (std::size_t t = 0; t < track.log_amounts.size(); ++t) {
    out << (t + 1) << ',' << (t < ds.train_len ? "train" : "test") << ','
        << fixed(track.log_amounts[t]);
    if (const auto& f = track.forecasts[t]) {
      out << ',' << fixed(f->mean) << ',' << fixed(f->lower) << ',' << fixed(f->upper) << ','
          << fixed(f->mean + std::sqrt(f->variance));
    } else {
      out << ",NA,NA,NA,NA";
    }
    out << ',' << (track.evp[t] ? fixed(*track.evp[t]) : std::string("NA")) << ','
        << (sd_flags[t] ? 1 : 0) << ',' << (evp_flags[t] ? 1 : 0) << '\n';
  }
  return out.str();
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn:
    case ErrorKind::UnreadableFile:
    case ErrorKind::UnwritableFile:
    case ErrorKind::EmptyAfterFiltering:
    case ErrorKind::MalformedRecord:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InsufficientLegitimateData:
    case ErrorKind::NonPositiveAmount:
      return true;
    default:
      return false;
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::UnwritableFile, "cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::UnwritableFile, "write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::UnwritableFile, "cannot move into place: " + path.string());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

data::IngestionReport cmd_ingest(const IngestOptions& options, std::ostream& log) {
  auto result = data::ingest_csv(options.input, options.amount_column, options.region_column);
  auto stream = result.sequence;
  if (options.offset > 0 || options.length) {
    if (options.offset >= stream.size()) {
      throw Error(ErrorKind::InvalidArgument, "offset beyond the end of the data");
    }
    const std::size_t avail = stream.size() - options.offset;
    stream = stream.slice(options.offset, std::min(avail, options.length.value_or(avail)));
  }
  write_file_atomic(options.output, records_text(bundle::stream_records(stream)));
  if (options.region_map_output) {
    std::ostringstream map;
    map << "region_id,label\n";
    for (std::size_t i = 0; i < result.report.region_labels.size(); ++i) {
      map << (i + 1) << ',' << result.report.region_labels[i] << '\n';
    }
    write_file_atomic(*options.region_map_output, map.str());
  }
  log << "rows read:     " << result.report.rows_read << '\n'
      << "rows dropped:  " << result.report.rows_dropped << '\n'
      << "regions:       " << result.report.region_labels.size() << '\n'
      << "transactions:  " << stream.size() << " written to " << options.output.string() << '\n';
  return result.report;
}

data::ExperimentSet cmd_generate(const GenerateOptions& options, std::ostream& log) {
  const auto b = bundle::read_bundle(options.input);
  if (!b.is_stream) throw Error(ErrorKind::InvalidArgument, "generate expects a raw stream bundle");
  const auto fraud = fraud_config_for(b.stream, options.fraud);
  auto set = data::generate_experiment(b.stream, fraud, options.seed, options.fraud.datasets,
                                       options.fraud.train_len);
  write_file_atomic(options.output, records_text(bundle::experiment_records(set)));
  log << "datasets: " << set.legitimate.size() << " L + " << set.fraudulent.size() << " F ("
      << set.train_len << " train + " << set.block_len << " test each)\n"
      << "fraud amounts: mean " << fixed(fraud.amount_mean, 4) << ", std "
      << fixed(fraud.amount_std, 4) << '\n';
  return set;
}

ExperimentResult cmd_experiment(const ExperimentOptions& options, std::ostream& log) {
  options.config.validate();
  if (options.thetas.empty()) throw Error(ErrorKind::InvalidArgument, "no thresholds given");

  ExperimentResult result;
  const auto input = bundle::read_bundle(options.input);
  json fraud_info = nullptr;
  if (input.is_stream) {
    const auto fraud = fraud_config_for(input.stream, options.fraud);
    result.datasets = data::generate_experiment(input.stream, fraud, options.config.seed,
                                                options.fraud.datasets, options.fraud.train_len);
    fraud_info = fraud_json(fraud, options.fraud);
  } else {
    result.datasets = input.experiment;
    fraud_info = "from bundle";
  }

  std::vector<detect::AmountModel> amount_models;
  if (!options.amount_model || *options.amount_model == detect::AmountModel::Gp) {
    amount_models.push_back(detect::AmountModel::Gp);
  }
  if (!options.amount_model || *options.amount_model == detect::AmountModel::Ar) {
    amount_models.push_back(detect::AmountModel::Ar);
  }
  std::vector<detect::RegionModel> region_models{detect::RegionModel::Assoc};
  if (options.include_adjacency) region_models.push_back(detect::RegionModel::Adj);

  std::vector<const data::Dataset*> all;
  for (const auto& ds : result.datasets.legitimate) all.push_back(&ds);
  for (const auto& ds : result.datasets.fraudulent) all.push_back(&ds);

  const std::size_t combos = region_models.size() * amount_models.size();
  std::vector<std::vector<std::vector<detect::ScoredTransaction>>> per_dataset(
      all.size(), std::vector<std::vector<detect::ScoredTransaction>>(combos));
  std::vector<std::vector<detect::AmountTrack>> tracks(all.size());
  detect::GpFitCache cache;

  log << "scoring " << all.size() << " datasets with " << combos << " method(s)\n";
  parallel_for(all.size(), options.jobs, [&](std::size_t i) {
    const auto& ds = *all[i];
    std::vector<std::vector<double>> regions;
    for (auto rm : region_models) regions.push_back(detect::region_track(ds, rm, options.config));
    for (std::size_t a = 0; a < amount_models.size(); ++a) {
      tracks[i].push_back(detect::amount_track(ds, amount_models[a], options.config, &cache));
      for (std::size_t r = 0; r < region_models.size(); ++r) {
        per_dataset[i][r * amount_models.size() + a] = detect::combine_tracks(
            ds, tracks[i].back(), amount_models[a], regions[r], region_models[r]);
      }
    }
  });

  for (std::size_t r = 0; r < region_models.size(); ++r) {
    for (std::size_t a = 0; a < amount_models.size(); ++a) {
      MethodResult m;
      m.amount_model = amount_models[a];
      m.region_model = region_models[r];
      const std::size_t idx = r * amount_models.size() + a;
      // Method numbering: assoc+gp, assoc+ar, adj+gp, adj+ar.
      const int number = static_cast<int>(r) * 2 + (amount_models[a] == detect::AmountModel::Gp ? 1 : 2);
      m.name = "method" + std::to_string(number);
      for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& s = per_dataset[i][idx];
        m.scored.insert(m.scored.end(), s.begin(), s.end());
      }
      m.report = detect::sweep(m.scored, options.thetas);
      result.methods.push_back(std::move(m));
    }
  }

  // Outputs.
  std::error_code ec;
  fs::create_directories(options.out_dir / "plots", ec);
  if (ec) throw Error(ErrorKind::UnwritableFile, "cannot create " + options.out_dir.string());

  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file_atomic(options.out_dir / name, content);
    outputs.push_back(name);
  };

  emit("datasets.csv", records_text(bundle::experiment_records(result.datasets)));
  for (const auto& m : result.methods) {
    std::ostringstream scored, sweep;
    write_scored(scored, m.scored);
    write_sweep_records(sweep, m);
    emit("scored_" + method_file_stem(m) + ".csv", scored.str());
    emit("sweep_" + method_file_stem(m) + ".csv", sweep.str());
  }
  {
    std::ostringstream table;
    write_sweep_table(table, result.methods);
    emit("report.txt", table.str());
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& ds = *all[i];
    if (ds.id != 1) continue;
    for (std::size_t a = 0; a < amount_models.size(); ++a) {
      const std::string name = "plots/amount_" + std::string(detect::to_string(amount_models[a])) +
                               "_" + (ds.kind == Label::Legitimate ? "L" : "F") +
                               std::to_string(ds.id) + ".csv";
      emit(name, plot_text(ds, tracks[i][a], options.config));
    }
  }

  json manifest;
  manifest["artifact"] = "fraudscore";
  manifest["version"] = kArtifactVersion;
  manifest["command"] = "experiment";
  manifest["seed"] = options.config.seed;
  manifest["model_config"] = config_json(options.config);
  manifest["fraud_config"] = fraud_info;
  manifest["thetas"] = options.thetas;
  manifest["include_adjacency"] = options.include_adjacency;
  manifest["inputs"] = json::array(
      {{{"path", options.input.filename().string()}, {"sha256", sha256_file(options.input)}}});
  json outs = json::array();
  for (const auto& name : outputs) {
    outs.push_back({{"file", name}, {"sha256", sha256_file(options.out_dir / name)}});
  }
  manifest["outputs"] = outs;
  write_file_atomic(options.out_dir / "manifest.json", manifest.dump(2) + "\n");

  write_sweep_table(log, result.methods);
  return result;
}

ModelSelectResult cmd_modelselect(const ModelSelectOptions& options, std::ostream& log) {
  const auto b = bundle::read_bundle(options.input);
  TransactionSequence seq;
  if (b.is_stream) {
    seq = b.stream;
  } else if (!b.experiment.fraudulent.empty()) {
    seq = b.experiment.fraudulent.front().transactions;
  } else {
    seq = b.experiment.legitimate.front().transactions;
  }
  const std::size_t n = std::min(options.length, seq.size());
  const auto y = log_transform(seq.slice(0, n));

  ModelSelectResult result;
  ar::ArFitOptions base;
  base.padding = options.padding;
  result.selection = ar::select_order(y, options.candidates, base);
  const auto& best = result.selection.best;
  const auto diffed = ar::difference(y, best.d);
  result.series_acf = ar::acf(diffed, options.max_lag);
  ar::ArFitOptions best_opts = base;
  best_opts.d = best.d;
  const auto model = ar::fit_ar(y, best.p, best_opts);
  result.residual_acf = ar::acf(ar::residuals(model, y, best_opts), options.max_lag);

  std::ostringstream table;
  table << "(p, d)   RMSE\n";
  for (const auto& row : result.selection.table) {
    table << '(' << row.order.p << ", " << row.order.d << ")   ";
    table << (row.rmse ? fixed(*row.rmse, 5) : "failed: " + row.error);
    if (row.order == best) table << "   *";
    table << '\n';
  }
  log << table.str();

  if (options.out_dir) {
    std::error_code ec;
    fs::create_directories(*options.out_dir, ec);
    if (ec) throw Error(ErrorKind::UnwritableFile, "cannot create " + options.out_dir->string());
    std::ostringstream rmse_csv;
    rmse_csv << "p,d,rmse,selected\n";
    for (const auto& row : result.selection.table) {
      rmse_csv << row.order.p << ',' << row.order.d << ','
               << (row.rmse ? fixed(*row.rmse, 6) : std::string("NA")) << ','
               << (row.order == best ? 1 : 0) << '\n';
    }
    write_file_atomic(*options.out_dir / "rmse.csv", rmse_csv.str());
    write_file_atomic(*options.out_dir / "rmse.txt", table.str());
    std::ostringstream acf_csv;
    acf_csv << "lag,series_acf,residual_acf,lower_bound,upper_bound\n";
    for (std::size_t k = 0; k < options.max_lag; ++k) {
      acf_csv << (k + 1) << ',' << fixed(result.series_acf.coefficients[k]) << ','
              << fixed(result.residual_acf.coefficients[k]) << ','
              << fixed(-result.residual_acf.bound) << ',' << fixed(result.residual_acf.bound)
              << '\n';
    }
    write_file_atomic(*options.out_dir / "acf.csv", acf_csv.str());
  }
  return result;
}

void write_scored(std::ostream& out, const std::vector<detect::ScoredTransaction>& scored) {
  out << kScoredHeader << '\n' << kScoredColumns << '\n';
  for (const auto& s : scored) {
    out << s.dataset_id << ',' << (s.kind == Label::Legitimate ? 'L' : 'F') << ',' << s.position
        << ',';
    if (s.point) {
      out << fixed(s.point->x()) << ',' << fixed(s.point->y()) << ',' << fixed(s.evp);
    } else {
      out << "NA,NA,NA";
    }
    out << ',' << to_string(s.kind) << '\n';
  }
}

std::vector<detect::ScoredTransaction> read_scored(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kScoredHeader, 0) != 0) {
    throw Error(ErrorKind::MalformedRecord, "missing scored-points header");
  }
  if (!std::getline(in, line) || line.rfind(kScoredColumns, 0) != 0) {
    throw Error(ErrorKind::MalformedRecord, "missing scored-points column line");
  }
  std::vector<detect::ScoredTransaction> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = data::split_csv_line(line);
    if (f.size() != 7) throw Error(ErrorKind::MalformedRecord, "scored line needs 7 fields");
    detect::ScoredTransaction s;
    try {
      s.dataset_id = std::stoi(f[0]);
      s.position = static_cast<std::size_t>(std::stoul(f[2]));
      if (f[1] != "L" && f[1] != "F") throw std::invalid_argument("kind");
      s.kind = f[1] == "L" ? Label::Legitimate : Label::Fraudulent;
      if (f[3] == "NA") {
        s.failure = "unscored";
      } else {
        s.point = ConfidencePoint(std::stod(f[3]), std::stod(f[4]));
        s.evp = std::stod(f[5]);
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(ErrorKind::MalformedRecord, "bad scored line: " + line);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_sweep_records(std::ostream& out, const MethodResult& m) {
  out << kSweepHeader << '\n' << kSweepColumns << '\n';
  for (std::size_t i = 0; i < m.report.rows.size(); ++i) {
    const auto& r = m.report.rows[i];
    out << m.name << ',' << (m.models_known ? detect::to_string(m.amount_model) : "NA") << ','
        << (m.models_known ? detect::to_string(m.region_model) : "NA") << ',' << fixed(r.theta, 2) << ',' << r.accuracy
        << ',' << fixed(r.accuracy_rate) << ',' << r.false_positive << ','
        << fixed(r.false_positive_rate) << ',' << r.false_negative << ','
        << fixed(r.false_negative_rate) << ',' << m.report.total << ',' << m.report.unscored
        << ',' << (i == m.report.best ? 1 : 0) << '\n';
  }
}

void write_sweep_table(std::ostream& out, const std::vector<MethodResult>& methods) {
  if (methods.empty()) return;
  const auto& thetas = methods.front().report.rows;
  auto cell = [](const std::string& s) {
    std::string c = s;
    if (c.size() < 12) c.insert(0, 12 - c.size(), ' ');
    return c;
  };
  auto rate2 = [](double r) {
    std::string s = fixed(r, 2);
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
  };
  std::ostringstream head;
  head << std::left << std::setw(22) << "method" << std::setw(16) << "metric";
  for (const auto& row : thetas) head << cell("theta=" + fixed(row.theta, 0));
  out << head.str() << '\n';
  for (const auto& m : methods) {
    const std::string label =
        m.models_known ? m.name + " " + std::string(detect::to_string(m.region_model)) + "+" +
                             std::string(detect::to_string(m.amount_model))
                       : m.name;
    std::ostringstream acc, fp, fn;
    acc << std::left << std::setw(22) << label << std::setw(16) << "accuracy";
    fp << std::left << std::setw(22) << "" << std::setw(16) << "false-positive";
    fn << std::left << std::setw(22) << "" << std::setw(16) << "false-negative";
    for (std::size_t i = 0; i < m.report.rows.size(); ++i) {
      const auto& r = m.report.rows[i];
      const std::string mark = i == m.report.best ? "*" : "";
      acc << cell(std::to_string(r.accuracy) + "(" + rate2(r.accuracy_rate) + ")" + mark);
      fp << cell(std::to_string(r.false_positive) + mark);
      fn << cell(std::to_string(r.false_negative) + mark);
    }
    out << acc.str() << '\n' << fp.str() << '\n' << fn.str() << '\n';
    out << std::left << std::setw(22) << "" << "scored " << m.report.total << " (L "
        << m.report.legitimate_total << ", F " << m.report.fraudulent_total << "), unscored "
        << m.report.unscored << ", best theta " << fixed(m.report.rows[m.report.best].theta, 0)
        << '\n';
  }
}

namespace {

struct ModelFlags {
  ModelConfig config;
  std::string amount_model;
  std::string region_model = "assoc";
  std::string lag_padding = "drop";
  std::string evp_side = "folded";
  std::string refit = "step";
  std::optional<std::size_t> window;
};

void add_model_flags(CLI::App* app, ModelFlags& f, bool require_seed) {
  auto* seed = app->add_option("--seed", f.config.seed, "Seed for every random draw");
  if (require_seed) seed->required();
  app->add_option("--amount-model", f.amount_model, "Amount model")
      ->check(CLI::IsMember({"ar", "gp"}));
  app->add_option("--region-model", f.region_model, "Region model")
      ->check(CLI::IsMember({"assoc", "adj"}));
  app->add_option("--p", f.config.p, "AR order")->check(CLI::Range(1, 50));
  app->add_option("--d", f.config.d, "Differencing order")->check(CLI::Range(0, 5));
  app->add_option("--sd", f.config.sd_multiplier, "Interval width in standard deviations")
      ->check(CLI::IsMember({1.0, 2.0}));
  app->add_option("--theta-ev", f.config.theta_ev, "EVP outlier threshold")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--row-len", f.config.row_len, "Path matrix row length")
      ->check(CLI::PositiveNumber);
  app->add_option("--window", f.window, "AR fit window (most recent points)");
  app->add_option("--refit", f.refit, "Refit policy")->check(CLI::IsMember({"step", "once"}));
  app->add_option("--lag-padding", f.lag_padding, "AR lag padding")
      ->check(CLI::IsMember({"zero", "drop"}));
  app->add_option("--evp-side", f.evp_side, "EVP deviation side")
      ->check(CLI::IsMember({"folded", "upper"}));
  app->add_flag("--center", f.config.center, "Center log-amounts before the GP fit");
  app->add_option("--gp-restarts", f.config.gp_restarts, "GP optimizer restarts")
      ->check(CLI::PositiveNumber);
}

ModelConfig resolve(const ModelFlags& f) {
  ModelConfig c = f.config;
  c.window = f.window;
  c.lag_padding = f.lag_padding == "zero" ? LagPadding::Zero : LagPadding::Drop;
  c.evp_side = f.evp_side == "upper" ? EvpSide::Upper : EvpSide::Folded;
  c.refit = f.refit == "once" ? RefitPolicy::Once : RefitPolicy::Step;
  c.validate();
  return c;
}

detect::AmountModel amount_model_of(const std::string& s) {
  return s == "ar" ? detect::AmountModel::Ar : detect::AmountModel::Gp;
}

void add_fraud_flags(CLI::App* app, FraudOptions& f, std::string& dist) {
  app->add_option("--fraud-mean", f.mean, "Fraud amount mean (default 3x legitimate mean)");
  app->add_option("--fraud-std", f.std, "Fraud amount std (default legitimate std)");
  app->add_option("--fraud-dist", dist, "Fraud amount distribution")
      ->check(CLI::IsMember({"truncnorm", "lognormal"}));
  app->add_option("--datasets", f.datasets, "Datasets per kind")->check(CLI::PositiveNumber);
  app->add_option("--train-len", f.train_len, "Training transactions per dataset")
      ->check(CLI::PositiveNumber);
}

void apply_dist(FraudOptions& f, const std::string& dist) {
  f.distribution = dist == "lognormal" ? data::FraudDistribution::LogNormal
                                       : data::FraudDistribution::TruncatedNormal;
}

std::vector<ar::OrderCandidate> parse_candidates(const std::string& text) {
  std::vector<ar::OrderCandidate> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "candidate must be p:d, got '" + item + "'");
    }
    try {
      out.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "candidate must be p:d, got '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty candidate list");
  return out;
}

const data::Dataset& find_dataset(const data::ExperimentSet& set, const std::string& name) {
  if (name.size() >= 2 && (name[0] == 'L' || name[0] == 'F')) {
    const auto& pool = name[0] == 'L' ? set.legitimate : set.fraudulent;
    try {
      const int id = std::stoi(name.substr(1));
      for (const auto& ds : pool) {
        if (ds.id == id) return ds;
      }
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::InvalidArgument, "no dataset named " + name);
}

data::ExperimentSet experiment_from(const fs::path& input) {
  auto b = bundle::read_bundle(input);
  if (b.is_stream) {
    throw Error(ErrorKind::InvalidArgument, "expected an assembled bundle (run generate first)");
  }
  return b.experiment;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Card-fraud scoring from amount and location sequences", "fraudscore"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Read a transaction CSV into a stream bundle");
  c_ingest->add_option("input", ingest.input, "CSV file")->required();
  c_ingest->add_option("-o,--out", ingest.output, "Output bundle")->required();
  c_ingest->add_option("--amount-column", ingest.amount_column, "Amount column name");
  c_ingest->add_option("--region-column", ingest.region_column, "Region column name");
  c_ingest->add_option("--offset", ingest.offset, "Skip this many valid transactions");
  c_ingest->add_option("--length", ingest.length, "Keep at most this many transactions");
  c_ingest->add_option("--region-map", ingest.region_map_output, "Write region id labels here");

  GenerateOptions gen;
  std::string gen_dist = "truncnorm";
  auto* c_gen = app.add_subcommand("generate", "Assemble the L and F datasets from a stream");
  c_gen->add_option("input", gen.input, "Stream bundle")->required();
  c_gen->add_option("-o,--out", gen.output, "Output bundle")->required();
  c_gen->add_option("--seed", gen.seed, "Seed for the fraud blocks")->required();
  add_fraud_flags(c_gen, gen.fraud, gen_dist);

  ExperimentOptions exp;
  ModelFlags exp_flags;
  std::string exp_dist = "truncnorm";
  auto* c_exp = app.add_subcommand("experiment", "Assemble, score and sweep every method");
  c_exp->add_option("input", exp.input, "Stream or assembled bundle")->required();
  c_exp->add_option("-o,--out-dir", exp.out_dir, "Output directory")->required();
  c_exp->add_option("--thetas", exp.thetas, "Thresholds")->delimiter(',');
  c_exp->add_option("--jobs", exp.jobs, "Worker threads (0: all cores)");
  add_model_flags(c_exp, exp_flags, true);
  add_fraud_flags(c_exp, exp.fraud, exp_dist);

  fs::path score_in, score_out;
  ModelFlags score_flags;
  std::string score_dataset;
  auto* c_score = app.add_subcommand("score", "Score the test transactions of a bundle");
  c_score->add_option("input", score_in, "Assembled bundle")->required();
  c_score->add_option("-o,--out", score_out, "Scored-points file")->required();
  c_score->add_option("--dataset", score_dataset, "Only this dataset (e.g. L1, F3)");
  add_model_flags(c_score, score_flags, false);

  fs::path sweep_in;
  std::optional<fs::path> sweep_out;
  std::vector<double> sweep_thetas = detect::kDefaultThetas;
  std::string sweep_name = "method";
  auto* c_sweep = app.add_subcommand("sweep", "Threshold sweep over a scored-points file");
  c_sweep->add_option("input", sweep_in, "Scored-points file")->required();
  c_sweep->add_option("-o,--out", sweep_out, "Sweep records file");
  c_sweep->add_option("--thetas", sweep_thetas, "Thresholds")->delimiter(',');
  c_sweep->add_option("--name", sweep_name, "Method label");

  ModelSelectOptions ms;
  std::string ms_candidates;
  std::string ms_padding = "drop";
  auto* c_ms = app.add_subcommand("modelselect", "RMSE table and ACF for AR order candidates");
  c_ms->add_option("input", ms.input, "Stream or assembled bundle")->required();
  c_ms->add_option("-o,--out-dir", ms.out_dir, "Write rmse.csv, rmse.txt and acf.csv here");
  c_ms->add_option("--candidates", ms_candidates, "Comma-separated p:d pairs");
  c_ms->add_option("--max-lag", ms.max_lag, "ACF lags")->check(CLI::PositiveNumber);
  c_ms->add_option("--length", ms.length, "Leading transactions to analyse")
      ->check(CLI::PositiveNumber);
  c_ms->add_option("--lag-padding", ms_padding, "AR lag padding")
      ->check(CLI::IsMember({"zero", "drop"}));

  fs::path scan_in;
  std::optional<fs::path> scan_out;
  std::string scan_dataset = "L1";
  std::string scan_mode = "evp";
  ModelFlags scan_flags;
  auto* c_scan = app.add_subcommand("scan", "Outlier flags along one dataset");
  c_scan->add_option("input", scan_in, "Assembled bundle")->required();
  c_scan->add_option("-o,--out", scan_out, "Plot-data file");
  c_scan->add_option("--dataset", scan_dataset, "Dataset name (e.g. L1, F3)");
  c_scan->add_option("--mode", scan_mode, "Outlier rule")->check(CLI::IsMember({"sd", "evp"}));
  add_model_flags(c_scan, scan_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (c_ingest->parsed()) {
      cmd_ingest(ingest, out);
    } else if (c_gen->parsed()) {
      apply_dist(gen.fraud, gen_dist);
      cmd_generate(gen, out);
    } else if (c_exp->parsed()) {
      apply_dist(exp.fraud, exp_dist);
      exp.config = resolve(exp_flags);
      if (!exp_flags.amount_model.empty()) exp.amount_model = amount_model_of(exp_flags.amount_model);
      exp.include_adjacency = exp_flags.region_model == "adj";
      cmd_experiment(exp, out);
    } else if (c_score->parsed()) {
      const auto config = resolve(score_flags);
      const auto set = experiment_from(score_in);
      const auto am = amount_model_of(score_flags.amount_model.empty() ? "gp" : score_flags.amount_model);
      const auto rm = score_flags.region_model == "adj" ? detect::RegionModel::Adj
                                                         : detect::RegionModel::Assoc;
      std::vector<const data::Dataset*> targets;
      if (!score_dataset.empty()) {
        targets.push_back(&find_dataset(set, score_dataset));
      } else {
        for (const auto& ds : set.legitimate) targets.push_back(&ds);
        for (const auto& ds : set.fraudulent) targets.push_back(&ds);
      }
      detect::GpFitCache cache;
      std::vector<detect::ScoredTransaction> scored;
      for (const auto* ds : targets) {
        auto s = detect::score_sequence(*ds, am, rm, config, &cache);
        scored.insert(scored.end(), s.begin(), s.end());
      }
      std::ostringstream text;
      write_scored(text, scored);
      write_file_atomic(score_out, text.str());
      std::size_t unscored = 0;
      for (const auto& s : scored) unscored += s.scored() ? 0 : 1;
      out << "scored " << scored.size() - unscored << " of " << scored.size()
          << " test transactions\n";
    } else if (c_sweep->parsed()) {
      std::ifstream in(sweep_in);
      if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + sweep_in.string());
      MethodResult m;
      m.name = sweep_name;
      m.models_known = false;
      m.scored = read_scored(in);
      m.report = detect::sweep(m.scored, sweep_thetas);
      if (sweep_out) {
        std::ostringstream text;
        write_sweep_records(text, m);
        write_file_atomic(*sweep_out, text.str());
      }
      write_sweep_table(out, {m});
    } else if (c_ms->parsed()) {
      if (!ms_candidates.empty()) ms.candidates = parse_candidates(ms_candidates);
      ms.padding = ms_padding == "zero" ? LagPadding::Zero : LagPadding::Drop;
      cmd_modelselect(ms, out);
    } else if (c_scan->parsed()) {
      const auto config = resolve(scan_flags);
      const auto set = experiment_from(scan_in);
      const auto& ds = find_dataset(set, scan_dataset);
      const auto am = amount_model_of(scan_flags.amount_model.empty() ? "gp" : scan_flags.amount_model);
      const auto mode = scan_mode == "sd" ? detect::OutlierMode::Sd : detect::OutlierMode::Evp;
      const auto scan = detect::outlier_scan(ds, am, mode, config);
      const auto text = plot_text(ds, scan.track, config);
      if (scan_out) write_file_atomic(*scan_out, text);
      std::size_t flagged = 0;
      for (bool f : scan.flags) flagged += f ? 1 : 0;
      out << "flagged " << flagged << " of " << scan.flags.size() << " transactions\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kUsageError : kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}

}  // namespace fraudscore::cli
