#include "hairrec/hair_db.hpp"
#include "hairrec/io.hpp"
#include "hairrec/scene.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

using namespace hairrec;

int main(int argc, char** argv) {
  CLI::App app{"hairdb: hairstyle database maintenance and retrieval"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build", "build rough meshes and meta for every style");
  std::string build_dir, build_config;
  build->add_option("dir", build_dir, "database directory of .hstr styles")->required();
  build->add_option("--config", build_config, "key = value config file");

  auto* query = app.add_subcommand("query", "rank styles against a query strand set");
  std::string query_strands, query_dir, query_config;
  int query_k = 20;
  query->add_option("query", query_strands, "query .hstr file")->required();
  query->add_option("dir", query_dir, "database directory")->required();
  query->add_option("--k", query_k, "number of results (default 20)");
  query->add_option("--config", query_config, "key = value config file");

  CLI11_PARSE(app, argc, argv);

  try {
    SceneConfig cfg;
    if (app.got_subcommand(build)) {
      if (!build_config.empty()) cfg = load_config(build_config);
      const HairDatabase db = build_database(build_dir, cfg);
      for (const auto& e : db.entries)
        std::cout << e.style.id << " " << e.style.strands.strands.size() << " strands, area "
                  << format_double(e.rough.surface_area) << "\n";
      std::cout << db.entries.size() << " styles built\n";
      return 0;
    }
    if (app.got_subcommand(query)) {
      if (!query_config.empty()) cfg = load_config(query_config);
      const StrandSet q = load_strands(query_strands);
      const HairDatabase db = load_database(query_dir, cfg);
      std::vector<std::string> all;
      for (const auto& e : db.entries) all.push_back(e.style.id);
      for (const auto& r : retrieve(q, db, all, query_k))
        std::cout << r.id << " " << format_double(r.distance) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", error_kind_name(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
