#include "ralab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ralab {
namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n <= 60) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return std::round(v);
  }
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0));
}

int parse_int(const std::string& text) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(text, &pos);
  } catch (const std::exception&) {
    throw InputError("bad integer: " + text);
  }
  if (pos != text.size()) throw InputError("bad integer: " + text);
  return v;
}

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw InputError("bad number: " + text);
  }
  if (pos != text.size()) throw InputError("bad number: " + text);
  return v;
}

}  // namespace

void IsingProblem::validate() const {
  if (n <= 0) throw InputError("problem needs at least one spin");
  if (static_cast<int>(h.size()) != n) {
    throw InputError("bias vector length does not match spin count");
  }
  for (const auto& c : couplings) {
    if (c.i <= c.j || c.j < 0 || c.i >= n) {
      throw InputError("coupling indices must satisfy 0 <= j < i < n");
    }
  }
}

double energy(const IsingProblem& p, const std::vector<int>& spins) {
  if (static_cast<int>(spins.size()) != p.n) {
    throw InputError("spin configuration length does not match problem");
  }
  double e = p.offset;
  for (int i = 0; i < p.n; ++i) {
    if (spins[i] != 1 && spins[i] != -1) {
      throw InputError("spins must be +1 or -1");
    }
    e += p.h[i] * spins[i];
  }
  for (const auto& c : p.couplings) e += c.value * spins[c.i] * spins[c.j];
  return e;
}

std::vector<int> spins_from_index(std::uint32_t index, int n) {
  if (n <= 0 || n > 31) throw InputError("state index needs 1..31 spins");
  if (index >> n) throw InputError("state index out of range");
  std::vector<int> spins(n);
  for (int k = 0; k < n; ++k) {
    spins[k] = ((index >> (n - 1 - k)) & 1u) ? -1 : 1;
  }
  return spins;
}

std::string state_label(std::uint32_t index, int n) {
  auto spins = spins_from_index(index, n);
  std::string s(n, 'u');
  for (int k = 0; k < n; ++k) s[k] = spins[k] == 1 ? 'u' : 'd';
  return s;
}

std::uint32_t index_from_label(const std::string& label) {
  if (label.empty() || label.size() > 31) {
    throw InputError("bad state label: '" + label + "'");
  }
  std::uint32_t idx = 0;
  for (char c : label) {
    idx <<= 1;
    if (c == 'd' || c == 'D' || c == '1') {
      idx |= 1;
    } else if (c != 'u' && c != 'U' && c != '0') {
      throw InputError("bad state label: '" + label + "'");
    }
  }
  return idx;
}

double Spectrum::total_states() const {
  double t = 0.0;
  for (const auto& l : levels) t += l.degeneracy;
  return t;
}

double Spectrum::ground_energy() const {
  if (levels.empty()) throw InputError("empty spectrum");
  return levels.front().energy;
}

Spectrum enumerate_spectrum(const IsingProblem& p, double merge_tol) {
  p.validate();
  if (p.n > kMaxEnumerationSpins) {
    throw CapabilityError("exhaustive enumeration limited to " +
                          std::to_string(kMaxEnumerationSpins) + " spins");
  }
  std::uint32_t total = 1u << p.n;
  std::vector<std::pair<double, std::uint32_t>> all;
  all.reserve(total);
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    all.emplace_back(energy(p, spins_from_index(idx, p.n)), idx);
  }
  std::sort(all.begin(), all.end());
  Spectrum spec;
  spec.n = p.n;
  for (const auto& [e, idx] : all) {
    if (!spec.levels.empty() &&
        e - spec.levels.back().energy <= merge_tol) {
      spec.levels.back().degeneracy += 1.0;
    } else {
      spec.levels.push_back({e, 1.0, idx});
    }
  }
  return spec;
}

Spectrum chain_spectrum(int n, double J) {
  if (n < 2) throw InputError("chain spectrum needs n >= 2");
  Spectrum spec;
  spec.n = n;
  for (int k = 0; k < n; ++k) {
    SpectrumLevel lvl;
    lvl.energy = J * (n - 1 - 2 * k);
    lvl.degeneracy = 2.0 * binomial(n - 1, k);
    if (n <= kMaxEnumerationSpins) {
      // k broken bonds: alternate over the first k+1 spins, constant after.
      std::uint32_t idx = 0;
      for (int i = 0; i < n; ++i) {
        int spin = (i < k && ((k - i) % 2 == 1)) ? -1 : 1;
        if (spin == -1) idx |= 1u << (n - 1 - i);
      }
      lvl.representative = idx;
    }
    spec.levels.push_back(lvl);
  }
  std::sort(spec.levels.begin(), spec.levels.end(),
            [](const SpectrumLevel& a, const SpectrumLevel& b) {
              return a.energy < b.energy;
            });
  // J = 0 collapses everything into a single level.
  std::vector<SpectrumLevel> merged;
  for (const auto& l : spec.levels) {
    if (!merged.empty() && l.energy - merged.back().energy <= 1e-12) {
      merged.back().degeneracy += l.degeneracy;
    } else {
      merged.push_back(l);
    }
  }
  spec.levels = std::move(merged);
  return spec;
}

IsingProblem make_ferro_chain(int n, double J) {
  if (n < 2) throw InputError("chain needs n >= 2");
  IsingProblem p;
  p.n = n;
  p.h.assign(n, 0.0);
  for (int i = 1; i < n; ++i) p.couplings.push_back({i, i - 1, J});
  return p;
}

IsingProblem make_single_spin(double h1) {
  IsingProblem p;
  p.n = 1;
  p.h = {h1};
  return p;
}

IsingProblem make_two_spin(double h, double J, double lift) {
  IsingProblem p;
  p.n = 2;
  p.h = {h * (1.0 + lift), h * (1.0 - lift)};
  p.couplings.push_back({1, 0, J});
  return p;
}

void TwoSatInstance::validate() const {
  if (n_vars <= 0) throw InputError("2-SAT instance needs variables");
  for (const auto& c : clauses) {
    for (int lit : {c.lit1, c.lit2}) {
      if (lit == 0 || std::abs(lit) > n_vars) {
        throw InputError("2-SAT literal out of range: " +
                         std::to_string(lit));
      }
    }
  }
}

bool TwoSatInstance::satisfied(const std::vector<int>& spins) const {
  if (static_cast<int>(spins.size()) != n_vars) {
    throw InputError("assignment length does not match variable count");
  }
  for (const auto& c : clauses) {
    bool t1 = spins[std::abs(c.lit1) - 1] == (c.lit1 > 0 ? 1 : -1);
    bool t2 = spins[std::abs(c.lit2) - 1] == (c.lit2 > 0 ? 1 : -1);
    if (!t1 && !t2) return false;
  }
  return true;
}

TwoSatInstance load_2sat(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open 2-SAT file: " + path);
  TwoSatInstance inst;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  long n_clauses = -1;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    if (!header_seen) {
      long nv = 0, nc = 0;
      if (!(ss >> nv >> nc)) continue;  // blank or comment-only line
      if (nv <= 0 || nc < 0) {
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": bad header counts");
      }
      inst.n_vars = static_cast<int>(nv);
      n_clauses = nc;
      header_seen = true;
      continue;
    }
    long l1 = 0, l2 = 0;
    if (!(ss >> l1 >> l2)) continue;
    inst.clauses.push_back(
        {static_cast<int>(l1), static_cast<int>(l2)});
  }
  if (!header_seen) throw InputError(path + ": missing 2-SAT header");
  if (n_clauses >= 0 &&
      static_cast<long>(inst.clauses.size()) != n_clauses) {
    throw InputError(path + ": clause count does not match header");
  }
  inst.validate();
  return inst;
}

void save_2sat(const std::string& path, const TwoSatInstance& inst) {
  inst.validate();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write 2-SAT file: " + path);
  out << inst.n_vars << " " << inst.clauses.size() << "\n";
  for (const auto& c : inst.clauses) {
    out << c.lit1 << " " << c.lit2 << "\n";
  }
}

TwoSatInstance two_block_2sat(int n_vars) {
  if (n_vars < 4) throw InputError("two-block instance needs >= 4 variables");
  TwoSatInstance inst;
  inst.n_vars = n_vars;
  int first_block = (n_vars + 1) / 2;
  auto add_chain = [&inst](int lo, int hi) {
    for (int v = lo; v < hi; ++v) {
      inst.clauses.push_back({-v, v + 1});
      inst.clauses.push_back({v, -(v + 1)});
    }
  };
  add_chain(1, first_block);
  add_chain(first_block + 1, n_vars);
  return inst;
}

IsingProblem map_2sat(const TwoSatInstance& inst) {
  inst.validate();
  IsingProblem p;
  p.n = inst.n_vars;
  p.h.assign(p.n, 0.0);
  std::map<std::pair<int, int>, double> j;
  for (const auto& c : inst.clauses) {
    int i = std::abs(c.lit1) - 1, a = c.lit1 > 0 ? 1 : -1;
    int k = std::abs(c.lit2) - 1, b = c.lit2 > 0 ? 1 : -1;
    if (i == k) {
      if (a == b) {
        // (l | l): penalty (1 - a*s)/2
        p.offset += 0.5;
        p.h[i] -= 0.5 * a;
      }
      // (l | !l) is a tautology and contributes nothing
      continue;
    }
    // (1 - a*s_i)(1 - b*s_k)/4 penalizes the single falsifying assignment
    p.offset += 0.25;
    p.h[i] -= 0.25 * a;
    p.h[k] -= 0.25 * b;
    auto key = std::make_pair(std::max(i, k), std::min(i, k));
    j[key] += 0.25 * a * b;
  }
  for (const auto& [key, val] : j) {
    if (val != 0.0) p.couplings.push_back({key.first, key.second, val});
  }
  p.validate();
  return p;
}

IsingProblem builtin_problem(const std::string& name) {
  if (name == "2S1") return make_two_spin(-1.0, 0.95);
  if (name == "2S2") return make_two_spin(-1.0, 1.00);
  if (name == "2S3") return make_two_spin(-0.95, 1.00);
  if (name.rfind("1S(", 0) == 0 && name.back() == ')') {
    return make_single_spin(parse_double(name.substr(3, name.size() - 4)));
  }
  if (name.rfind("chain(", 0) == 0 && name.back() == ')') {
    std::string args = name.substr(6, name.size() - 7);
    auto comma = args.find(',');
    if (comma == std::string::npos) {
      return make_ferro_chain(parse_int(args));
    }
    return make_ferro_chain(parse_int(args.substr(0, comma)),
                            parse_double(args.substr(comma + 1)));
  }
  if (name.rfind("2sat:", 0) == 0) {
    return map_2sat(load_2sat(name.substr(5)));
  }
  throw InputError("unknown problem '" + name +
                   "'; expected 1S(h), 2S1, 2S2, 2S3, chain(n[,J]), or "
                   "2sat:<path>");
}

}  // namespace ralab
