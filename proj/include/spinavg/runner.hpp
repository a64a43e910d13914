#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinavg/evolver.hpp"
#include "spinavg/observables.hpp"

namespace spinavg {

// Schema or file-format violation; what() carries the offending field path.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniform time grid, endpoints included. count = 1 collapses to {start}.
struct TimeGrid {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    std::vector<double> points() const;
};

// One requested solver run. label() names the output CSV stem.
struct MethodSpec {
    enum class Kind { short_time, weak_disorder, sk_exact, baseline };

    Kind kind = Kind::short_time;
    int order = 3;                                                          // short_time only
    Method::Regularization regularization = Method::Regularization::exponential;  // weak_disorder only
    long shots = 1000;                                                      // baseline only

    std::string label() const;
};

struct ExperimentConfig {
    DisorderModel model;
    PauliAxis initial_axis = PauliAxis::Z;
    TimeGrid times;
    std::vector<ObservableSpec> observables;
    std::vector<MethodSpec> methods;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    EvolveOptions tolerances;
};

// Strict JSON-schema parse: unknown keys, missing fields, out-of-range
// values, and incompatible model/method combinations all raise config_error
// naming the field. load_config reads the file and remembers its raw text
// for provenance hashing.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path, std::string* raw_text = nullptr);

// Shortest decimal string that parses back to the identical double.
std::string format_double(double value);

// FNV-1a over the raw bytes, rendered as 16 hex digits.
std::string content_hash(const std::string& text);

// One method's trajectory table. Column 0 is always t.
struct MethodTable {
    std::string name;
    std::vector<std::string> columns;
    Eigen::MatrixXd data;
};

MethodTable run_method(const ExperimentConfig& config, const MethodSpec& method);

std::string render_csv(const MethodTable& table);
MethodTable read_csv_file(const std::string& path);

struct RunOutcome {
    std::string directory;
    std::vector<std::string> files;  // relative to directory, sidecar last
};

// Runs every method (concurrently), then writes one CSV per method plus a
// run.json sidecar, serialized in config order. config_text is hashed into
// the sidecar. dry_run prints the resolved plan to log and writes nothing.
RunOutcome run_experiment(const ExperimentConfig& config, const std::string& config_text,
                          bool dry_run, std::ostream& log);

struct ColumnDeviation {
    std::string column;
    double max_deviation = 0.0;
};

struct CompareReport {
    std::vector<ColumnDeviation> deviations;  // shared data columns
    bool has_t_delta = false;
    double t_delta = 0.0;
    bool pass = true;
};

// Requires identical time grids and compares shared columns. t_delta is the
// first time at which a string-normalized magnetization of A deviates from
// B by at least threshold times the variance scale on the same axis, where
// the scale is the running maximum of B's string-normalized variance
// (deviations below 1e-12 never count). B is the reference run.
CompareReport compare_tables(const MethodTable& a, const MethodTable& b, double threshold);
CompareReport compare_files(const std::string& path_a, const std::string& path_b,
                            double threshold, std::ostream& log);

// Maps exceptions from action() onto the documented exit codes: 0 from the
// action itself, 2 for configuration errors, 3 for feasibility limits, 4 for
// numeric failures. Messages go to err.
int run_guarded(const std::function<int()>& action, std::ostream& err);

}  // namespace spinavg
