#include "fluidtop/galerkin.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fluidtop {
namespace {

constexpr char kMagic[8] = {'F', 'T', 'B', 'A', 'S', 'I', 'S', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  put(os, static_cast<std::int64_t>(m.rows()));
  put(os, static_cast<std::int64_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

bool get_matrix(std::istream& is, Eigen::MatrixXd& m) {
  std::int64_t r = 0;
  std::int64_t c = 0;
  if (!get(is, r) || !get(is, c) || r < 0 || c < 0) return false;
  m.resize(r, c);
  return static_cast<bool>(
      is.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size()))));
}

}  // namespace

std::filesystem::path basis_cache_file(const std::filesystem::path& dir, int n, int quad_degree,
                                       const BodyParams& params) {
  if (quad_degree <= 0) quad_degree = required_quad_degree(n);
  std::ostringstream name;
  name << "basis_N" << n << "_q" << quad_degree << "_rho" << std::hex
       << std::bit_cast<std::uint64_t>(params.rho) << "_nu" << std::bit_cast<std::uint64_t>(params.nu)
       << ".bin";
  return dir / name.str();
}

void save_basis_cache(const std::filesystem::path& file, const GalerkinBasis& basis) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open basis cache for writing: " + file.string());
  os.write(kMagic, sizeof(kMagic));
  put(os, static_cast<std::int32_t>(basis.size()));
  put(os, static_cast<std::int32_t>(basis.quad_degree));
  put(os, basis.rho);
  put(os, basis.nu);
  put(os, static_cast<std::int32_t>(basis.field_degree));
  put(os, static_cast<std::uint64_t>(basis.node_count));
  put(os, basis.diagnostics);
  put_matrix(os, basis.mass);
  put_matrix(os, basis.stiffness);
  put_matrix(os, basis.moment);
  for (const auto& g : basis.coriolis) put_matrix(os, g);
  for (const auto& c : basis.convection) put_matrix(os, c);
  for (const auto& fld : basis.fields) {
    for (const auto& comp : fld) {
      put(os, static_cast<std::uint64_t>(comp.terms().size()));
      for (const auto& [e, c] : comp.terms()) {
        for (int k : e) put(os, static_cast<std::int32_t>(k));
        put(os, c);
      }
    }
  }
  if (!os) throw std::runtime_error("failed writing basis cache: " + file.string());
}

std::optional<GalerkinBasis> load_basis_cache(const std::filesystem::path& file, int n,
                                              int quad_degree, const BodyParams& params) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  if (quad_degree <= 0) quad_degree = required_quad_degree(n);

  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    return std::nullopt;
  }
  std::int32_t size = 0;
  std::int32_t qdeg = 0;
  double rho = 0.0;
  double nu = 0.0;
  if (!get(is, size) || !get(is, qdeg) || !get(is, rho) || !get(is, nu)) return std::nullopt;
  if (size != n || (n > 0 && qdeg != quad_degree) ||
      std::bit_cast<std::uint64_t>(rho) != std::bit_cast<std::uint64_t>(params.rho) ||
      std::bit_cast<std::uint64_t>(nu) != std::bit_cast<std::uint64_t>(params.nu)) {
    return std::nullopt;
  }

  GalerkinBasis b;
  b.quad_degree = qdeg;
  b.rho = rho;
  b.nu = nu;
  std::int32_t fdeg = 0;
  std::uint64_t nodes = 0;
  if (!get(is, fdeg) || !get(is, nodes) || !get(is, b.diagnostics)) return std::nullopt;
  b.field_degree = fdeg;
  b.node_count = nodes;
  if (!get_matrix(is, b.mass) || !get_matrix(is, b.stiffness) || !get_matrix(is, b.moment)) {
    return std::nullopt;
  }
  for (auto& g : b.coriolis) {
    if (!get_matrix(is, g)) return std::nullopt;
  }
  b.convection.resize(static_cast<std::size_t>(n));
  for (auto& c : b.convection) {
    if (!get_matrix(is, c)) return std::nullopt;
  }
  b.fields.resize(static_cast<std::size_t>(n));
  for (auto& fld : b.fields) {
    for (auto& comp : fld) {
      std::uint64_t terms = 0;
      if (!get(is, terms)) return std::nullopt;
      for (std::uint64_t t = 0; t < terms; ++t) {
        std::array<std::int32_t, 3> e{};
        double c = 0.0;
        if (!get(is, e[0]) || !get(is, e[1]) || !get(is, e[2]) || !get(is, c)) return std::nullopt;
        comp += Polynomial::monomial({e[0], e[1], e[2]}, c);
      }
    }
  }
  return b;
}

BasisPtr build_or_load_basis(int n, int quad_degree, const BodyParams& params,
                             const std::filesystem::path& cache_dir) {
  if (!cache_dir.empty()) {
    const auto file = basis_cache_file(cache_dir, n, quad_degree, params);
    if (auto cached = load_basis_cache(file, n, quad_degree, params)) {
      return std::make_shared<const GalerkinBasis>(std::move(*cached));
    }
    auto built = std::make_shared<const GalerkinBasis>(build_ball_basis(n, quad_degree, params));
    std::filesystem::create_directories(cache_dir);
    save_basis_cache(file, *built);
    return built;
  }
  return std::make_shared<const GalerkinBasis>(build_ball_basis(n, quad_degree, params));
}

}  // namespace fluidtop
