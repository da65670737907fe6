// Copyright 2026 The dpstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <exception>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Differentially private block, retrieval and key-value storage"};
  app.require_subcommand(1);
  dpstore::cli::add_serve(app);
  dpstore::cli::add_dpir(app);
  dpstore::cli::add_dpram(app);
  dpstore::cli::add_maptool(app);
  dpstore::cli::add_dpkvs(app);
  dpstore::cli::add_audit(app);
  dpstore::cli::add_bench(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const dpstore::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
