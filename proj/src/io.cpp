#include "symld/io.hpp"

#include <cstdio>
#include <fstream>

#include "symld/errors.hpp"

namespace symld {

namespace {

Rational rational_from_json(const Json& j) {
  const auto read = [](const Json& v) -> BigInt {
    if (v.is_string()) return BigInt(v.get<std::string>());
    if (v.is_number_integer()) return BigInt(v.get<long long>());
    throw DomainError("rational parts must be integers or integer strings");
  };
  return Rational(read(j.at("num")), read(j.at("den")));
}

Json rational_to_json(const Rational& r) {
  return Json{{"num", boost::multiprecision::numerator(r).str()},
              {"den", boost::multiprecision::denominator(r).str()}};
}

}  // namespace

Json alphabet_to_json(const Alphabet& a) {
  Json pts = Json::array();
  for (const auto& p : a.points()) pts.push_back(Json{{"id", p.id}, {"coords", p.coords}});
  Json j{{"points", pts}};
  // always emit the metric explicitly so round-trips are exact
  Json metric = Json::array();
  for (int i = 0; i < a.size(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < a.size(); ++k) row.push_back(a.distance(i, k));
    metric.push_back(row);
  }
  j["metric"] = metric;
  return j;
}

AlphabetPtr alphabet_from_json(const Json& j) {
  std::vector<Point> pts;
  for (const auto& p : j.at("points")) {
    Point pt;
    pt.id = p.at("id").get<std::string>();
    if (p.contains("coords")) pt.coords = p.at("coords").get<std::vector<double>>();
    pts.push_back(std::move(pt));
  }
  if (j.contains("metric")) {
    const auto& m = j.at("metric");
    const int k = static_cast<int>(pts.size());
    Grid2<double> metric(k, k, 0.0);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < k; ++c) metric(i, c) = m.at(i).at(c).get<double>();
    return make_alphabet(std::move(pts), std::move(metric));
  }
  return make_alphabet(std::move(pts));
}

Json measure_to_json(const DiscreteMeasure& m) {
  Json j = alphabet_to_json(*m.alphabet());
  Json w = Json::object();
  for (int i = 0; i < m.size(); ++i) {
    if (m.has_exact()) {
      w[m.alphabet()->point(i).id] = rational_to_json(m.exact_weight(i));
    } else {
      w[m.alphabet()->point(i).id] = m.weight(i);
    }
  }
  j["weights"] = w;
  return j;
}

DiscreteMeasure measure_from_json(const Json& j) {
  AlphabetPtr a = alphabet_from_json(j);
  const auto& w = j.at("weights");
  // exact path when every weight is rational with a common denominator
  bool all_rational = true;
  for (const auto& [id, v] : w.items()) {
    (void)id;
    if (!v.is_object()) all_rational = false;
  }
  if (all_rational && !w.empty()) {
    BigInt common_den = 1;
    std::vector<Rational> rs(a->size(), Rational(0));
    for (const auto& [id, v] : w.items()) {
      rs[a->index_of(id)] = rational_from_json(v);
    }
    for (const auto& r : rs) {
      const BigInt den = boost::multiprecision::denominator(r);
      common_den = boost::multiprecision::lcm(common_den, den);
    }
    if (common_den <= BigInt(1'000'000'000)) {
      const auto denom = common_den.convert_to<std::int64_t>();
      std::vector<std::int64_t> counts(a->size(), 0);
      for (int i = 0; i < a->size(); ++i) {
        const Rational scaled(rs[i] * common_den);
        counts[i] = boost::multiprecision::numerator(scaled).convert_to<std::int64_t>();
      }
      (void)denom;
      return DiscreteMeasure::from_counts(a, std::move(counts));
    }
  }
  std::vector<double> weights(a->size(), 0.0);
  for (const auto& [id, v] : w.items()) {
    weights[a->index_of(id)] = v.is_object() ? to_double(rational_from_json(v)) : v.get<double>();
  }
  return DiscreteMeasure(a, std::move(weights));
}

Json pair_measure_to_json(const PairMeasure& m) {
  Json j = alphabet_to_json(*m.alphabet());
  Json cells = Json::array();
  for (int i = 0; i < m.size(); ++i)
    for (int c = 0; c < m.size(); ++c) {
      if (m.weight(i, c) == 0.0 && !m.has_exact()) continue;
      Json cell{{"x", m.alphabet()->point(i).id}, {"y", m.alphabet()->point(c).id}};
      if (m.has_exact()) {
        if (m.exact_counts()(i, c) == 0) continue;
        cell["w"] = rational_to_json(m.exact_weight(i, c));
      } else {
        cell["w"] = m.weight(i, c);
      }
      cells.push_back(cell);
    }
  j["pair_weights"] = cells;
  return j;
}

PairMeasure pair_measure_from_json(const Json& j) {
  AlphabetPtr a = alphabet_from_json(j);
  const int k = a->size();
  const auto& cells = j.at("pair_weights");
  bool all_rational = !cells.empty();
  for (const auto& c : cells)
    if (!c.at("w").is_object()) all_rational = false;
  if (all_rational) {
    std::vector<Rational> rs(static_cast<std::size_t>(k) * k, Rational(0));
    for (const auto& c : cells) {
      rs[a->index_of(c.at("x").get<std::string>()) * k + a->index_of(c.at("y").get<std::string>())] =
          rational_from_json(c.at("w"));
    }
    BigInt common_den = 1;
    for (const auto& r : rs)
      common_den = boost::multiprecision::lcm(common_den, boost::multiprecision::denominator(r));
    if (common_den <= BigInt(1'000'000'000)) {
      Grid2<std::int64_t> counts(k, k, 0);
      for (int i = 0; i < k * k; ++i) {
        const Rational scaled(rs[i] * common_den);
        counts.v[i] = boost::multiprecision::numerator(scaled).convert_to<std::int64_t>();
      }
      return PairMeasure::from_counts(a, std::move(counts));
    }
  }
  Grid2<double> w(k, k, 0.0);
  for (const auto& c : cells) {
    const int x = a->index_of(c.at("x").get<std::string>());
    const int y = a->index_of(c.at("y").get<std::string>());
    w(x, y) = c.at("w").is_object() ? to_double(rational_from_json(c.at("w"))) : c.at("w").get<double>();
  }
  return PairMeasure(a, std::move(w));
}

Json sample_to_json(const IndexedSample& s) {
  Json j = alphabet_to_json(*s.alphabet());
  Json arr = Json::array();
  for (int i = 0; i < s.size(); ++i) arr.push_back(s.alphabet()->point(s.at(i)).id);
  j["sample"] = arr;
  return j;
}

IndexedSample sample_from_json(const Json& j) {
  AlphabetPtr a = alphabet_from_json(j);
  std::vector<int> idx;
  for (const auto& id : j.at("sample")) idx.push_back(a->index_of(id.get<std::string>()));
  return IndexedSample(a, std::move(idx));
}

PairAtoms pair_atoms_from_json(const Json& j) {
  PairAtoms out{alphabet_from_json(j), {}};
  for (const auto& c : j.at("atoms")) {
    out.atoms.emplace_back(out.alphabet->index_of(c.at("x").get<std::string>()),
                           out.alphabet->index_of(c.at("y").get<std::string>()));
  }
  return out;
}

Json transport_plan_to_json(const TransportPlan& plan) {
  Json mass = Json::array();
  for (int i = 0; i < plan.mass.rows; ++i) {
    Json row = Json::array();
    for (int j = 0; j < plan.mass.cols; ++j) row.push_back(plan.mass(i, j));
    mass.push_back(row);
  }
  return Json{{"mass", mass}, {"source", plan.source}, {"target", plan.target}};
}

Json assignment_to_json(const AssignmentResult& r) {
  return Json{{"perm", r.perm.map}, {"cost", r.cost}, {"multiple_optima", r.multiple_optima}};
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DomainError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open output file: " + tmp);
    out << content;
    out.flush();
    if (!out) throw DomainError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DomainError("atomic rename failed: " + path);
  }
}

}  // namespace symld
