// Generates instruction-tuning examples from a corpus of videos with scene
// graphs (and captions, for the objectives that need them). Output is JSONL;
// the same corpus, objective, and seed always produce identical bytes.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli_common.hpp"
#include "vot/datagen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"instruction-tuning data generator"};

  std::string corpus_path;
  std::string objective_name;
  std::string out_path = "-";
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;

  app.add_option("--corpus", corpus_path, "corpus JSON file")->required();
  app.add_option("--objective", objective_name, "one of L1..L5")->required();
  app.add_option("--out", out_path, "JSONL output (default: stdout)");
  app.add_option("--seed", seed, "generation seed (default: 0)");
  app.add_option("--negative-ratio", negative_ratio,
                 "negatives per positive for L1 (default: 1.0)");

  if (const auto code = vot::cli::parse_or_exit(app, argc, argv)) return *code;

  return vot::cli::guarded([&]() -> int {
    const vot::datagen::Objective objective =
        vot::datagen::objective_from_string(objective_name);
    const std::vector<vot::datagen::VideoStsgPair> corpus =
        vot::datagen::load_corpus(corpus_path);
    const std::vector<vot::datagen::TuningExample> examples =
        vot::datagen::gen_examples(objective, corpus, negative_ratio, seed);
    vot::cli::write_output(out_path, vot::datagen::to_jsonl(examples));
    if (out_path != "-") {
      std::cout << "wrote " << examples.size() << " examples to " << out_path << "\n";
    }
    return 0;
  });
}
