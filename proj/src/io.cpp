#include "binmem/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "binmem/errors.hpp"

namespace binmem {

namespace {

void emit(std::ostream& os, const nlohmann::json& value, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (value.type()) {
    case nlohmann::json::value_t::object: {
      if (value.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::json(key).dump() << ": ";
        emit(os, item, depth + 1);
      }
      os << '\n' << close_pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (value.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& item : value) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        emit(os, item, depth + 1);
      }
      os << '\n' << close_pad << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = value.get<double>();
      os << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    default:
      os << value.dump();
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_path_csv(std::ostream& os, const DiscretePath& path) {
  os << "step,t,xi,W,Y,S\n";
  const bool has_price = path.S.size() == path.Y.size();
  for (Eigen::Index k = 0; k < path.Y.size(); ++k) {
    const double xi = k == 0 ? 0.0 : path.xi[k - 1];
    os << k << ',' << format_double(path.time(static_cast<std::size_t>(k))) << ','
       << format_double(xi) << ',' << format_double(path.W[k]) << ',' << format_double(path.Y[k])
       << ',';
    if (has_price) os << format_double(path.S[k]);
    os << '\n';
  }
}

void write_json(std::ostream& os, const nlohmann::json& value) {
  emit(os, value, 0);
  os << '\n';
}

std::string to_json_text(const nlohmann::json& value) {
  std::ostringstream os;
  write_json(os, value);
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  file << text;
  if (!file) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace binmem
