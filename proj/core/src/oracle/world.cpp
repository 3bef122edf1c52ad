#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "p2l/error.hpp"
#include "p2l/oracle.hpp"
#include "p2l/summarize.hpp"

namespace p2l::oracle {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Dataset sample_domain(const DomainSpec& spec, std::size_t dim, std::uint64_t stream) {
  std::mt19937_64 rng(stream);
  std::uniform_int_distribution<std::uint32_t> pick_class(0, static_cast<std::uint32_t>(spec.classes - 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset d;
  d.dim = dim;
  d.classes = spec.classes;
  d.x.resize(spec.items * dim);
  d.y.resize(spec.items);
  for (std::size_t i = 0; i < spec.items; ++i) {
    const auto c = pick_class(rng);
    d.y[i] = c;
    for (std::size_t j = 0; j < dim; ++j) d.x[i * dim + j] = spec.centroids[c][j] + spec.noise * gauss(rng);
  }
  return d;
}

Dataset slice(const Dataset& d, std::size_t begin, std::size_t end) {
  Dataset out;
  out.dim = d.dim;
  out.classes = d.classes;
  out.x.assign(d.x.begin() + static_cast<std::ptrdiff_t>(begin * d.dim),
               d.x.begin() + static_cast<std::ptrdiff_t>(end * d.dim));
  out.y.assign(d.y.begin() + static_cast<std::ptrdiff_t>(begin), d.y.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

void validate_spec(const WorldSpec& spec) {
  if (spec.feature_dim == 0 || spec.embed_dim == 0) throw Error(ErrorCode::BadSpec, "dimensions must be >= 1");
  if (spec.domains.size() < 2) throw Error(ErrorCode::BadSpec, "need >= 2 domains");
  std::vector<std::string> names;
  for (const auto& d : spec.domains) {
    if (d.name.empty()) throw Error(ErrorCode::BadSpec, "domain without a name");
    if (d.classes < 2) throw Error(ErrorCode::BadSpec, "domain '" + d.name + "' needs >= 2 classes");
    if (d.items < 4) throw Error(ErrorCode::BadSpec, "domain '" + d.name + "' needs >= 4 items");
    if (d.centroids.size() != d.classes) {
      throw Error(ErrorCode::BadSpec, "domain '" + d.name + "' needs one centroid per class");
    }
    for (const auto& c : d.centroids) {
      if (c.size() != spec.feature_dim) throw Error(ErrorCode::BadSpec, "centroid dim mismatch in '" + d.name + "'");
    }
    if (!(d.noise >= 0.0)) throw Error(ErrorCode::BadSpec, "negative noise in '" + d.name + "'");
    names.push_back(d.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw Error(ErrorCode::BadSpec, "duplicate domain names");
  }
  if (spec.reference_source &&
      std::none_of(spec.domains.begin(), spec.domains.end(), [&](const DomainSpec& d) {
        return d.name == *spec.reference_source && d.role == DomainRole::Source;
      })) {
    throw Error(ErrorCode::BadSpec, "reference '" + *spec.reference_source + "' is not a source domain");
  }
}

// Orthonormal basis of `rank` random directions.
std::vector<std::vector<double>> random_basis(std::size_t dim, std::size_t rank, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> basis;
  while (basis.size() < rank) {
    std::vector<double> v(dim);
    for (auto& x : v) x = gauss(rng);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += v[j] * b[j];
      for (std::size_t j = 0; j < dim; ++j) v[j] -= dot * b[j];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;
    for (auto& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::string_view> labels) {
  std::uint64_t h = splitmix64(seed);
  for (auto label : labels) {
    std::uint64_t f = 0xCBF29CE484222325ULL;  // FNV-1a
    for (unsigned char c : label) {
      f ^= c;
      f *= 0x100000001B3ULL;
    }
    h = splitmix64(h ^ f);
  }
  return h;
}

Dataset Dataset::head(std::size_t n) const { return slice(*this, 0, std::min(n, size())); }

const Domain& OracleWorld::domain(const std::string& name) const {
  for (const auto& d : domains) {
    if (d.spec.name == name) return d;
  }
  throw Error(ErrorCode::UnknownName, "no domain '" + name + "'");
}

std::vector<std::string> OracleWorld::names(DomainRole role) const {
  std::vector<std::string> out;
  for (const auto& d : domains) {
    if (d.spec.role == role) out.push_back(d.spec.name);
  }
  return out;
}

OracleWorld generate_world(std::uint64_t seed, const WorldSpec& spec) {
  validate_spec(spec);
  OracleWorld w;
  w.seed = seed;
  w.feature_dim = spec.feature_dim;
  w.embed_dim = spec.embed_dim;
  w.reference_source = spec.reference_source;

  for (const auto& ds : spec.domains) {
    const Dataset all = sample_domain(ds, spec.feature_dim, stream_seed(seed, {"domain", ds.name}));
    const std::size_t q = ds.items / 4;
    Domain d;
    d.spec = ds;
    d.source_train = slice(all, 0, q);
    d.source_val = slice(all, q, 2 * q);
    d.target_pool = slice(all, 2 * q, 3 * q);
    d.target_val = slice(all, 3 * q, 4 * q);
    w.domains.push_back(std::move(d));
  }

  auto& ex = w.extractor;
  ex.in_dim = spec.feature_dim;
  ex.out_dim = spec.embed_dim;
  ex.weights.resize(ex.in_dim * ex.out_dim);
  ex.bias.resize(ex.out_dim);
  std::mt19937_64 rng(stream_seed(seed, {"extractor"}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ex.in_dim));
  for (auto& a : ex.weights) a = scale * gauss(rng);
  for (auto& b : ex.bias) b = 0.5 * gauss(rng);
  char id[40];
  std::snprintf(id, sizeof id, "oracle-ref-%016llx", static_cast<unsigned long long>(seed));
  ex.id = id;
  return w;
}

WorldSpec themed_world_spec(std::uint64_t seed, const ThemedWorldOptions& o) {
  if (o.num_themes == 0 || o.theme_rank == 0 || o.theme_rank > o.feature_dim || o.common_rank > o.feature_dim ||
      !(o.theme_purity >= 0.0 && o.theme_purity <= 1.0) || o.min_classes < 2 ||
      o.max_classes < o.min_classes || o.min_source_items < 4 || o.max_source_items < o.min_source_items ||
      o.num_sources + o.num_targets < 2) {
    throw Error(ErrorCode::BadSpec, "inconsistent themed world options");
  }
  std::mt19937_64 rng(stream_seed(seed, {"themes"}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> class_count(o.min_classes, o.max_classes);

  struct Theme {
    std::vector<double> centre;
    std::vector<std::vector<double>> basis;
  };
  std::vector<Theme> themes(o.num_themes);
  for (auto& t : themes) {
    t.centre.resize(o.feature_dim);
    for (auto& c : t.centre) c = o.theme_spread * gauss(rng);
    t.basis = random_basis(o.feature_dim, o.theme_rank, rng);
  }
  const auto common = random_basis(o.feature_dim, o.common_rank, rng);

  auto make_domain = [&](std::string name, std::size_t theme, std::size_t items, DomainRole role) {
    DomainSpec d;
    d.name = std::move(name);
    d.items = items;
    d.role = role;
    d.noise = o.noise;
    d.classes = class_count(rng);
    // Mostly the primary theme, the rest spread over all themes at random.
    std::vector<double> mix(o.num_themes);
    double total = 0.0;
    for (auto& m : mix) total += (m = -std::log(1.0 - unit(rng)));
    for (auto& m : mix) m *= (1.0 - o.theme_purity) / total;
    mix[theme] += o.theme_purity;
    std::vector<double> centre(o.feature_dim, 0.0);
    for (std::size_t t = 0; t < o.num_themes; ++t) {
      for (std::size_t j = 0; j < o.feature_dim; ++j) centre[j] += mix[t] * themes[t].centre[j];
    }
    for (auto& c : centre) c += o.domain_jitter * gauss(rng);
    for (std::size_t c = 0; c < d.classes; ++c) {
      std::vector<double> mu = centre;
      for (std::size_t t = 0; t < o.num_themes; ++t) {
        for (const auto& b : themes[t].basis) {
          const double a = o.class_scale * std::sqrt(mix[t]) * gauss(rng);
          for (std::size_t j = 0; j < o.feature_dim; ++j) mu[j] += a * b[j];
        }
      }
      for (const auto& b : common) {
        const double a = o.common_scale * gauss(rng);
        for (std::size_t j = 0; j < o.feature_dim; ++j) mu[j] += a * b[j];
      }
      for (auto& m : mu) m += o.off_theme_scale * gauss(rng);
      d.centroids.push_back(std::move(mu));
    }
    return d;
  };

  WorldSpec spec;
  spec.feature_dim = o.feature_dim;
  spec.embed_dim = o.embed_dim;

  // Source sizes are stratified over the log range so every world has a spread.
  std::vector<std::size_t> strata(o.num_sources);
  for (std::size_t i = 0; i < strata.size(); ++i) strata[i] = i;
  std::shuffle(strata.begin(), strata.end(), rng);
  const double lo = std::log(static_cast<double>(o.min_source_items));
  const double hi = std::log(static_cast<double>(o.max_source_items));
  for (std::size_t i = 0; i < o.num_sources; ++i) {
    const double u = (static_cast<double>(strata[i]) + unit(rng)) / static_cast<double>(o.num_sources);
    const auto items = static_cast<std::size_t>(std::llround(std::exp(lo + u * (hi - lo))));
    spec.domains.push_back(make_domain("src-" + std::to_string(i), i % o.num_themes, items, DomainRole::Source));
  }
  std::uniform_int_distribution<std::size_t> pick_theme(0, o.num_themes - 1);
  for (std::size_t i = 0; i < o.num_targets; ++i) {
    spec.domains.push_back(make_domain("tgt-" + std::to_string(i), pick_theme(rng), o.target_items, DomainRole::Target));
  }
  if (o.num_sources > 0) spec.reference_source = "src-0";
  return spec;
}

EmbeddingMatrix extract(const OracleWorld& world, const Dataset& data) {
  const auto& ex = world.extractor;
  if (data.dim != ex.in_dim) throw Error(ErrorCode::DimensionMismatch, "dataset dim != extractor input dim");
  std::vector<double> out(data.size() * ex.out_dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    for (std::size_t o = 0; o < ex.out_dim; ++o) {
      double a = ex.bias[o];
      const double* w = ex.weights.data() + o * ex.in_dim;
      for (std::size_t j = 0; j < ex.in_dim; ++j) a += w[j] * x[j];
      out[i * ex.out_dim + o] = a > 0.0 ? a : 0.0;
    }
  }
  return EmbeddingMatrix(data.size(), ex.out_dim, std::move(out), ex.id);
}

DatasetProfile profile_of(const OracleWorld& world, const std::string& name, const Dataset& data, Role role) {
  DatasetProfile p;
  p.name = name;
  p.size = data.size();
  p.summary = summarize(extract(world, data), Summarizer::mean());
  p.extractor_id = world.extractor.id;
  p.role = role;
  return p;
}

OracleWorld with_source_limit(const OracleWorld& world, const std::string& source, std::size_t items) {
  if (items == 0) throw Error(ErrorCode::InvalidArgument, "source limit must be >= 1");
  OracleWorld out = world;
  for (auto& d : out.domains) {
    if (d.spec.name == source) {
      d.source_train = d.source_train.head(items);
      return out;
    }
  }
  throw Error(ErrorCode::UnknownName, "no domain '" + source + "'");
}

OracleWorld with_pooled_source(const OracleWorld& world, std::span<const std::string> members,
                               const std::string& name) {
  if (members.size() < 2) throw Error(ErrorCode::InvalidArgument, "pooling needs >= 2 members");
  for (const auto& d : world.domains) {
    if (d.spec.name == name) throw Error(ErrorCode::InvalidArgument, "domain '" + name + "' exists");
  }
  Domain pooled;
  pooled.spec.name = name;
  pooled.spec.role = DomainRole::Source;
  auto& train = pooled.source_train;
  auto& val = pooled.source_val;
  train.dim = val.dim = world.feature_dim;
  std::uint32_t offset = 0;
  for (const auto& m : members) {
    const auto& d = world.domain(m);
    for (const auto& [src, dst] : {std::pair{&d.source_train, &train}, std::pair{&d.source_val, &val}}) {
      dst->x.insert(dst->x.end(), src->x.begin(), src->x.end());
      for (auto y : src->y) dst->y.push_back(y + offset);
    }
    offset += static_cast<std::uint32_t>(d.spec.classes);
    pooled.spec.centroids.insert(pooled.spec.centroids.end(), d.spec.centroids.begin(), d.spec.centroids.end());
  }
  train.classes = val.classes = offset;
  pooled.spec.classes = offset;
  pooled.spec.items = train.size() + val.size();
  OracleWorld out = world;
  out.domains.push_back(std::move(pooled));
  return out;
}

}  // namespace p2l::oracle
