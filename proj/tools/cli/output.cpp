#include "cli/output.hpp"

#include <fstream>
#include <system_error>
#include <vector>

#include "driverid/error.hpp"

namespace driverid::cli {

void StagedOutput::commit() const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());

  std::vector<std::filesystem::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& [name, content] : files_) {
    const auto tmp = dir_ / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      cleanup();
      throw Error("cannot write " + tmp.string());
    }
    temps.push_back(tmp);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw Error("failed writing " + tmp.string());
    }
  }
  for (const auto& [name, content] : files_) {
    std::filesystem::rename(dir_ / (name + ".tmp"), dir_ / name, ec);
    if (ec) {
      cleanup();
      throw Error("cannot move " + name + " into " + dir_.string() + ": " + ec.message());
    }
  }
}

}  // namespace driverid::cli
