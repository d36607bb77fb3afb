// Writes the desk-scale demo inputs (dictionaries and RGB seed images) that
// the shipped configs under configs/ reference. Run once before the
// generate/train/segment/eval sequence in the README.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "sdcn/image.hpp"
#include "sdcn/presets.hpp"
#include "sdcn/synthgen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write demo dictionaries and RGB seed images"};
  std::string out_dir = "data";
  app.add_option("--out", out_dir, "Output directory (default: data)");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  try {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    using namespace sdcn;
    save_dictionary(presets::astro_dictionary(), (dir / "astro_dict.json").string());
    save_dictionary(presets::xrf_dictionary(), (dir / "xrf_dict.json").string());
    write_ppm(presets::astro_seed_image(144, 144), (dir / "astro_seed_train.ppm").string());
    write_ppm(presets::astro_seed_image(64, 64), (dir / "astro_seed_test.ppm").string());
    write_ppm(presets::xrf_seed_image(128, 128), (dir / "xrf_seed_train.ppm").string());
    write_ppm(presets::xrf_seed_image(96, 96), (dir / "xrf_seed_test.ppm").string());

    std::cout << "wrote demo inputs to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "sdcn-demo-inputs: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
