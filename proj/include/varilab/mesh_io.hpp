#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "varilab/varifold.hpp"
#include "varilab/zoo.hpp"

// Mesh pair I/O: OFF/OBJ geometry plus a JSON sidecar carrying per-face
// multiplicity and vertex tags. A missing sidecar means theta = 1.

namespace varilab {

using nlohmann::json;

inline std::string sidecar_path(const std::string& mesh_path) { return mesh_path + ".json"; }

inline void write_off(const DiscreteVarifold& v, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  os.precision(17);
  bool ndim = v.ambient_dim != 3;
  if (ndim)
    os << "nOFF\n" << v.ambient_dim << "\n";
  else
    os << "OFF\n";
  os << v.num_vertices() << " " << v.num_faces() << " 0\n";
  for (int i = 0; i < v.num_vertices(); ++i) {
    for (int d = 0; d < v.ambient_dim; ++d) os << (d ? " " : "") << v.vertices(i, d);
    os << "\n";
  }
  for (int f = 0; f < v.num_faces(); ++f)
    os << "3 " << v.faces(f, 0) << " " << v.faces(f, 1) << " " << v.faces(f, 2) << "\n";
}

inline void write_obj(const DiscreteVarifold& v, const std::string& path) {
  if (v.ambient_dim != 3) throw Error(ErrorKind::IoError, "OBJ output requires ambient dim 3");
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  os.precision(17);
  for (int i = 0; i < v.num_vertices(); ++i)
    os << "v " << v.vertices(i, 0) << " " << v.vertices(i, 1) << " " << v.vertices(i, 2) << "\n";
  for (int f = 0; f < v.num_faces(); ++f)
    os << "f " << v.faces(f, 0) + 1 << " " << v.faces(f, 1) + 1 << " " << v.faces(f, 2) + 1
       << "\n";
}

inline void write_sidecar(const DiscreteVarifold& v, const std::string& mesh_path) {
  json j;
  j["face_multiplicity"] = std::vector<int>(v.multiplicity.data(),
                                            v.multiplicity.data() + v.multiplicity.size());
  json tags = json::object();
  for (int i = 0; i < v.num_vertices(); ++i)
    if (v.tags[i] != VertexTag::Interior) tags[std::to_string(i)] = tag_name(v.tags[i]);
  j["vertex_tags"] = tags;
  std::ofstream os(sidecar_path(mesh_path));
  if (!os) throw Error(ErrorKind::IoError, "cannot write sidecar for '" + mesh_path + "'");
  os << j.dump(2) << "\n";
}

inline void save_mesh(const DiscreteVarifold& v, const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".off")
    write_off(v, path);
  else if (ext == ".obj")
    write_obj(v, path);
  else
    throw Error(ErrorKind::IoError, "unknown mesh extension '" + ext + "'");
  write_sidecar(v, path);
}

namespace io_detail {

inline std::string next_content_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    auto cut = line.find('#');
    if (cut != std::string::npos) line = line.substr(0, cut);
    std::istringstream probe(line);
    std::string tok;
    if (probe >> tok) return line;
  }
  return {};
}

}  // namespace io_detail

inline DiscreteVarifold read_off(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::string header = io_detail::next_content_line(is);
  int dim = 3;
  {
    std::istringstream hs(header);
    std::string tag;
    hs >> tag;
    if (tag == "nOFF") {
      std::istringstream ds(io_detail::next_content_line(is));
      if (!(ds >> dim) || dim < 3) throw Error(ErrorKind::IoError, "bad nOFF dimension");
    } else if (tag != "OFF") {
      throw Error(ErrorKind::IoError, "'" + path + "' is not an OFF file");
    }
  }
  int nv = 0, nf = 0, ne = 0;
  {
    std::istringstream cs(io_detail::next_content_line(is));
    if (!(cs >> nv >> nf >> ne)) throw Error(ErrorKind::IoError, "bad OFF count line");
  }
  Mat V(nv, dim);
  for (int i = 0; i < nv; ++i) {
    std::istringstream ls(io_detail::next_content_line(is));
    for (int d = 0; d < dim; ++d)
      if (!(ls >> V(i, d))) throw Error(ErrorKind::IoError, "bad OFF vertex line");
  }
  Eigen::MatrixXi F(nf, 3);
  for (int f = 0; f < nf; ++f) {
    std::istringstream ls(io_detail::next_content_line(is));
    int k;
    if (!(ls >> k) || k != 3) throw Error(ErrorKind::IoError, "only triangle faces supported");
    for (int c = 0; c < 3; ++c)
      if (!(ls >> F(f, c))) throw Error(ErrorKind::IoError, "bad OFF face line");
  }
  Eigen::VectorXi theta;
  std::ifstream sj(sidecar_path(path));
  if (sj) {
    json j = json::parse(sj);
    if (j.contains("face_multiplicity")) {
      auto m = j["face_multiplicity"].get<std::vector<int>>();
      theta = Eigen::Map<Eigen::VectorXi>(m.data(), static_cast<int>(m.size()));
    }
  }
  return build(std::move(V), std::move(F), std::move(theta), dim);
}

inline DiscreteVarifold read_obj(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "v") {
      Eigen::Vector3d p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw Error(ErrorKind::IoError, "bad OBJ vertex");
      verts.push_back(p);
    } else if (tok == "f") {
      Eigen::Vector3i f;
      for (int c = 0; c < 3; ++c) {
        std::string ref;
        if (!(ls >> ref)) throw Error(ErrorKind::IoError, "bad OBJ face");
        f(c) = std::stoi(ref.substr(0, ref.find('/'))) - 1;
      }
      faces.push_back(f);
    }
  }
  Mat V(static_cast<int>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) V.row(static_cast<int>(i)) = verts[i];
  Eigen::MatrixXi F(static_cast<int>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) F.row(static_cast<int>(i)) = faces[i];
  Eigen::VectorXi theta;
  std::ifstream sj(sidecar_path(path));
  if (sj) {
    json j = json::parse(sj);
    if (j.contains("face_multiplicity")) {
      auto m = j["face_multiplicity"].get<std::vector<int>>();
      theta = Eigen::Map<Eigen::VectorXi>(m.data(), static_cast<int>(m.size()));
    }
  }
  return build(std::move(V), std::move(F), std::move(theta), 3);
}

inline DiscreteVarifold load_mesh(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".off") return read_off(path);
  if (ext == ".obj") return read_obj(path);
  throw Error(ErrorKind::IoError, "unknown mesh extension '" + ext + "'");
}

inline std::uint64_t mesh_hash(const DiscreteVarifold& v) {
  std::uint64_t h = fnv1a(&v.ambient_dim, sizeof(v.ambient_dim));
  h = fnv1a(v.vertices.data(), sizeof(double) * v.vertices.size(), h);
  h = fnv1a(v.faces.data(), sizeof(int) * v.faces.size(), h);
  h = fnv1a(v.multiplicity.data(), sizeof(int) * v.multiplicity.size(), h);
  return h;
}

// ---------------------------------------------------------------------------
// ZooSpec serialization

inline json zoo_spec_to_json(const ZooSpec& s) {
  json j;
  j["kind"] = zoo_kind_name(s.kind);
  j["subdivisions"] = s.subdivisions;
  j["radius"] = s.radius;
  j["harmonic_l"] = s.harmonic_l;
  j["harmonic_m"] = s.harmonic_m;
  j["amplitude"] = s.amplitude;
  j["semi_axes"] = {s.semi_axes[0], s.semi_axes[1], s.semi_axes[2]};
  j["torus_R"] = s.torus_R;
  j["torus_r"] = s.torus_r;
  j["torus_nu"] = s.torus_nu;
  j["torus_nv"] = s.torus_nv;
  j["half_length"] = s.half_length;
  j["truncation"] = s.truncation;
  j["base_edge"] = s.base_edge;
  j["grading_ratio"] = s.grading_ratio;
  j["pole"] = {s.pole.x(), s.pole.y(), s.pole.z()};
  j["multiplicity"] = s.multiplicity;
  j["seed"] = s.seed;
  return j;
}

inline ZooSpec zoo_spec_from_json(const json& j) {
  ZooSpec s;
  s.kind = zoo_kind_from_name(j.at("kind").get<std::string>());
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("subdivisions", s.subdivisions);
  get("radius", s.radius);
  get("harmonic_l", s.harmonic_l);
  get("harmonic_m", s.harmonic_m);
  get("amplitude", s.amplitude);
  get("torus_R", s.torus_R);
  get("torus_r", s.torus_r);
  get("torus_nu", s.torus_nu);
  get("torus_nv", s.torus_nv);
  get("half_length", s.half_length);
  get("truncation", s.truncation);
  get("base_edge", s.base_edge);
  get("grading_ratio", s.grading_ratio);
  get("multiplicity", s.multiplicity);
  get("seed", s.seed);
  if (j.contains("semi_axes"))
    for (int d = 0; d < 3; ++d) s.semi_axes[d] = j.at("semi_axes").at(d).get<double>();
  if (j.contains("pole"))
    for (int d = 0; d < 3; ++d) s.pole(d) = j.at("pole").at(d).get<double>();
  return s;
}

}  // namespace varilab
