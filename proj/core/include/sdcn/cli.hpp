#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sdcn {
namespace cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Command-line flag overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool integrated = false;
  bool quiet = false;
};

// Each runner validates its JSON config (unknown keys are rejected, paths
// must exist), executes, and maps errors to exit codes: 0 ok, 1 runtime,
// 2 config.
int run_generate(const std::string& config_path, const Overrides& overrides = {});
int run_train(const std::string& config_path, const Overrides& overrides = {});
int run_segment(const std::string& config_path, const Overrides& overrides = {});
int run_eval(const std::string& config_path, const Overrides& overrides = {});

/// Caps Eigen/OpenMP parallelism from the SDCN_THREADS environment variable.
void apply_thread_cap();

}  // namespace cli
}  // namespace sdcn
