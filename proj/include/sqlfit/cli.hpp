#pragma once

// Command-line front end. Parsing and dispatch live in the library so tests
// can drive whole commands in-process; the binary under tools/ is a thin
// wrapper around main_entry.

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace sqlfit::cli {

struct RunConfig {
    std::string command;    // validate | analyze-budget | prune | merge | evaluate | report
    std::string help_text;  // set instead of a command when help was requested

    std::string schemas_path;
    std::vector<std::string> example_paths;  // validate: one or more files
    std::string examples_path;               // analyze-budget, prune
    std::string base_path;                   // merge
    std::vector<std::string> variant_specs;  // merge: "lang=path", argument order kept
    std::string gold_path;                   // evaluate
    std::string predictions_path;            // evaluate
    std::string report_path;                 // report
    std::string vocabulary_path;

    std::string language = "en";
    std::string tokenizer = "approximate";  // approximate | vocabulary
    std::size_t limit = 512;
    std::size_t margin = 0;  // headroom subtracted from the limit
    bool prune_all = false;
    bool drop_primary_keys = false;
    bool drop_foreign_keys = false;
    std::string star_policy = "keep-all";  // keep-all | columns-only
    std::string output_dir;                // --out, else SQLFIT_OUTPUT_DIR, else "."
    std::string format = "human";          // human | json (stdout rendering)
    unsigned jobs = 1;
};

// Turns command-line words (program name excluded) into a config. A help
// request yields a config whose help_text is set and command is empty; bad
// flags raise a usage error whose message includes the relevant help text.
RunConfig parse_args(const std::vector<std::string>& args);

// Executes one parsed command: reads inputs, writes artifacts into the
// output directory (atomically), renders to `out`, and reports problems on
// `err`. Returns the documented exit code: 0 success, 1 usage, 2 validation
// or configuration failure, 3 I/O failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse + run with every error mapped to its exit code; what main() calls.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sqlfit::cli
