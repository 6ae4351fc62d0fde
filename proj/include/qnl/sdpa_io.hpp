#pragma once
// Sparse SDPA file io.
//
// The file encodes the standard SDPA pair
//   (P) min c.x   s.t. X = sum_i x_i F_i - F_0 psd
//   (D) max <F_0, Y> s.t. <F_i, Y> = c_i, Y psd.
// Problems here are written against (D): a max-sense problem exports as
// F_0 = objective; a min-sense problem exports F_0 = -objective, so the
// external optimum equals minus the min-sense optimum. Importing always
// yields the max-sense reading, which makes export -> import the identity
// on max-sense problems.
//
// Emission is canonical: entries sorted by (matrix, block, i, j), 1-based
// indices, upper triangle only, "%.17g" number formatting, one newline per
// record, no comments. Inequality constraints must be slack-converted before
// export; diagonal blocks use negative block sizes.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qnl/sdp.hpp"

namespace qnl {

namespace sdpa_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace sdpa_detail

inline void export_sdpa(const SdpProblem& p, std::ostream& os) {
  sdp_detail::validate(p);
  for (const auto& con : p.cons)
    if (con.rel != Rel::eq)
      throw SdpError("sdpa export: convert inequalities to equalities first");
  if (p.obj_offset != 0.0)
    throw SdpError("sdpa export: nonzero objective offset is not representable");

  const double osign = (p.sense == Sense::max) ? 1.0 : -1.0;

  os << p.cons.size() << "\n";
  os << p.blocks.size() << "\n";
  {
    std::string line;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      if (b) line += " ";
      int s = p.blocks[b].side;
      line += std::to_string(p.blocks[b].kind == BlockKind::diag ? -s : s);
    }
    os << line << "\n";
  }
  {
    std::string line;
    for (std::size_t k = 0; k < p.cons.size(); ++k) {
      if (k) line += " ";
      line += sdpa_detail::num(p.cons[k].rhs);
    }
    os << line << "\n";
  }
  auto emit = [&](int matno, const std::vector<SdpEntry>& es, double sign) {
    for (const auto& e : sdp_detail::canonical_entries(es)) {
      os << matno << " " << (e.block + 1) << " " << (e.i + 1) << " " << (e.j + 1)
         << " " << sdpa_detail::num(sign * e.v) << "\n";
    }
  };
  emit(0, p.obj, osign);
  for (std::size_t k = 0; k < p.cons.size(); ++k) emit(int(k) + 1, p.cons[k].a, 1.0);
}

inline void export_sdpa_file(const SdpProblem& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SdpError("sdpa export: cannot open " + path);
  export_sdpa(p, f);
}

inline SdpProblem import_sdpa(std::istream& is) {
  auto next_data_line = [&](std::string& line) -> bool {
    while (std::getline(is, line)) {
      std::size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos) continue;
      if (line[pos] == '*' || line[pos] == '"') continue;
      return true;
    }
    return false;
  };
  auto tokenize = [](const std::string& line) {
    std::string clean;
    for (char ch : line)
      clean += (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')')
                   ? ' '
                   : ch;
    std::istringstream ss(clean);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
  };

  std::string line;
  if (!next_data_line(line)) throw SdpError("sdpa import: missing m");
  int m = std::stoi(tokenize(line).at(0));
  if (!next_data_line(line)) throw SdpError("sdpa import: missing block count");
  int nblocks = std::stoi(tokenize(line).at(0));
  if (!next_data_line(line)) throw SdpError("sdpa import: missing block sizes");
  auto sizes = tokenize(line);
  if (int(sizes.size()) < nblocks) throw SdpError("sdpa import: short size line");

  SdpProblem p;
  p.sense = Sense::max;
  for (int b = 0; b < nblocks; ++b) {
    int s = std::stoi(sizes[b]);
    if (s == 0) throw SdpError("sdpa import: zero block size");
    p.add_block("block" + std::to_string(b + 1), std::abs(s),
                s < 0 ? BlockKind::diag : BlockKind::psd);
  }
  if (!next_data_line(line)) throw SdpError("sdpa import: missing rhs line");
  auto rhs = tokenize(line);
  if (int(rhs.size()) < m) throw SdpError("sdpa import: short rhs line");
  p.cons.resize(m);
  for (int k = 0; k < m; ++k) {
    p.cons[k].rhs = std::stod(rhs[k]);
    p.cons[k].rel = Rel::eq;
  }

  while (next_data_line(line)) {
    auto t = tokenize(line);
    if (t.size() != 5) throw SdpError("sdpa import: bad entry line: " + line);
    int matno = std::stoi(t[0]);
    int blk = std::stoi(t[1]) - 1;
    int i = std::stoi(t[2]) - 1;
    int j = std::stoi(t[3]) - 1;
    double v = std::stod(t[4]);
    if (blk < 0 || blk >= nblocks) throw SdpError("sdpa import: block out of range");
    if (i > j) std::swap(i, j);
    SdpEntry e{blk, i, j, v};
    if (matno == 0) p.obj.push_back(e);
    else if (matno >= 1 && matno <= m) p.cons[matno - 1].a.push_back(e);
    else throw SdpError("sdpa import: matrix number out of range");
  }
  for (auto& con : p.cons) con.a = sdp_detail::canonical_entries(std::move(con.a));
  p.obj = sdp_detail::canonical_entries(std::move(p.obj));
  sdp_detail::validate(p);
  return p;
}

inline SdpProblem import_sdpa_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SdpError("sdpa import: cannot open " + path);
  return import_sdpa(f);
}

}  // namespace qnl
