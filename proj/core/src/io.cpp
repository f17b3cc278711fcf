#include "dpmat/io.hpp"

#include <charconv>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "dpmat/errors.hpp"
#include "dpmat/serialize.hpp"

namespace dpmat {
namespace {

constexpr char kRowsMagic[4] = {'R', 'O', 'W', 'S'};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_field(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw InputError("rows csv line " + std::to_string(line_no) +
                     ": bad numeric field '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::vector<Vector> read_rows_csv(std::istream& in) {
  std::vector<Vector> rows;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index d = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> vals;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      vals.push_back(parse_field(
          std::string_view(line).substr(start, end - start), line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (d < 0) {
      d = static_cast<Eigen::Index>(vals.size());
    } else if (static_cast<Eigen::Index>(vals.size()) != d) {
      throw InputError("rows csv line " + std::to_string(line_no) + ": got " +
                       std::to_string(vals.size()) + " fields, expected " +
                       std::to_string(d));
    }
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = vals[i];
    rows.push_back(std::move(v));
  }
  return rows;
}

std::vector<Vector> read_rows_bin(std::istream& in) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  // Size checks up front so all ByteReader reads below are in bounds;
  // this reader reports InputError, never the snapshot taxonomy.
  if (bytes.size() < 8) throw InputError("rows bin: truncated header");
  ByteReader r(bytes);
  char magic[4];
  for (auto& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kRowsMagic, 4) != 0) {
    throw InputError("rows bin: bad magic");
  }
  const std::uint32_t d = r.u32();
  if (d == 0) throw InputError("rows bin: zero dimension");
  if (r.remaining() % (8ull * d) != 0) {
    throw InputError("rows bin: truncated row data");
  }
  std::vector<Vector> rows;
  while (r.remaining() > 0) {
    Vector v(d);
    for (std::uint32_t i = 0; i < d; ++i) v(i) = r.f64();
    rows.push_back(std::move(v));
  }
  return rows;
}

void write_rows_csv(std::ostream& out, const std::vector<Vector>& rows) {
  out << std::setprecision(17);
  for (const auto& v : rows) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) out << ',';
      out << v(i);
    }
    out << '\n';
  }
}

void write_rows_bin(std::ostream& out, const std::vector<Vector>& rows) {
  ByteWriter w;
  w.bytes(kRowsMagic, 4);
  const std::uint32_t d =
      rows.empty() ? 0u : static_cast<std::uint32_t>(rows.front().size());
  w.u32(d);
  for (const auto& v : rows) {
    for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
  }
  const auto& bytes = w.data();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dpmat
