#include "ocreid/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ocreid/common.hpp"

namespace fs = std::filesystem;

namespace ocreid {

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::query: return "query";
    case Split::gallery: return "gallery";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "query") return Split::query;
  if (s == "gallery") return Split::gallery;
  throw ParseError("unknown split tag: '" + s + "'");
}

DatasetLayout layout_from_string(const std::string& s) {
  if (s == "manifest") return DatasetLayout::manifest;
  if (s == "prcc_like") return DatasetLayout::prcc_like;
  if (s == "ltcc_like") return DatasetLayout::ltcc_like;
  if (s == "synthetic") return DatasetLayout::synthetic;
  throw ConfigError("unknown dataset layout: '" + s + "'");
}

std::string to_string(DatasetLayout l) {
  switch (l) {
    case DatasetLayout::manifest: return "manifest";
    case DatasetLayout::prcc_like: return "prcc_like";
    case DatasetLayout::ltcc_like: return "ltcc_like";
    case DatasetLayout::synthetic: return "synthetic";
  }
  return "manifest";
}

std::vector<int> DatasetIndex::split_indices(Split s) const {
  std::vector<int> out;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(static_cast<int>(i));
  }
  return out;
}

int DatasetIndex::identity_class_of(int identity_id) const {
  auto it = identity_class.find(identity_id);
  if (it == identity_class.end()) {
    throw LabelError("identity id " + std::to_string(identity_id) + " not in index");
  }
  return it->second;
}

int DatasetIndex::clothes_class_of(int clothes_id) const {
  auto it = clothes_class.find(clothes_id);
  if (it == clothes_class.end()) {
    throw LabelError("clothes id " + std::to_string(clothes_id) + " not in index");
  }
  return it->second;
}

DatasetIndex build_index(const std::string& root, std::vector<SampleRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.path < b.path; });

  DatasetIndex idx;
  idx.root = root;
  std::map<int, int> clothes_owner;
  for (const auto& r : records) {
    if (r.identity_id < 0 || r.clothes_id < 0 || r.camera_id < 0) {
      throw IntegrityError("negative label in record '" + r.path + "'");
    }
    auto [it, inserted] = clothes_owner.emplace(r.clothes_id, r.identity_id);
    if (!inserted && it->second != r.identity_id) {
      throw IntegrityError("clothes id " + std::to_string(r.clothes_id) +
                           " appears under identities " + std::to_string(it->second) + " and " +
                           std::to_string(r.identity_id));
    }
  }
  for (const auto& [clothes, identity] : clothes_owner) {
    idx.clothes_of_identity[identity].insert(clothes);
  }
  std::set<int> ids;
  for (const auto& r : records) ids.insert(r.identity_id);
  int next = 0;
  for (int id : ids) idx.identity_class[id] = next++;
  next = 0;
  for (const auto& [clothes, identity] : clothes_owner) {
    (void)identity;
    idx.clothes_class[clothes] = next++;
  }
  idx.num_identities = static_cast<int>(ids.size());
  idx.num_clothes = static_cast<int>(clothes_owner.size());
  idx.records = std::move(records);
  return idx;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int_field(const std::string& s, const std::string& what, int line_no) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("manifest line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

DatasetIndex load_manifest(const std::string& root) {
  const fs::path manifest = fs::path(root) / "manifest.csv";
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest: " + manifest.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty manifest: " + manifest.string());
  auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"path", "identity_id", "clothes_id", "camera_id",
                                             "split"};
  if (header != expected) {
    throw ParseError("manifest header mismatch in " + manifest.string() +
                     "; expected path,identity_id,clothes_id,camera_id,split");
  }

  std::vector<SampleRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": expected 5 fields, got " +
                       std::to_string(f.size()));
    }
    SampleRecord r;
    r.path = f[0];
    r.identity_id = parse_int_field(f[1], "identity_id", line_no);
    r.clothes_id = parse_int_field(f[2], "clothes_id", line_no);
    r.camera_id = parse_int_field(f[3], "camera_id", line_no);
    r.split = split_from_string(f[4]);
    records.push_back(std::move(r));
  }
  return build_index(root, std::move(records));
}

std::vector<fs::path> sorted_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Directory adapter for PRCC-style trees:
//   <root>/train/<pid>/<cam-letter>*.png       same-clothes captures
//   <root>/test/A/<pid>/*.png                  gallery, camera A
//   <root>/test/B/<pid>/*.png                  same-clothes queries, camera B
//   <root>/test/C/<pid>/*.png                  cross-clothes queries, camera C
// Cameras A/B share an outfit per identity; camera C wears the other one.
DatasetIndex load_prcc_like(const std::string& root) {
  std::vector<SampleRecord> records;
  std::map<std::string, int> pid_index;
  auto pid_of = [&](const std::string& name) {
    auto [it, ins] = pid_index.emplace(name, static_cast<int>(pid_index.size()));
    (void)ins;
    return it->second;
  };
  auto add_dir = [&](const fs::path& dir, Split split, int camera, bool cross_clothes) {
    for (const auto& f : sorted_files(dir)) {
      const fs::path rel = fs::relative(f, root);
      auto it = rel.begin();
      std::advance(it, static_cast<long>(std::distance(rel.begin(), rel.end())) - 2);
      const int pid = pid_of(it->string());
      SampleRecord r;
      r.path = rel.generic_string();
      r.identity_id = pid;
      r.clothes_id = 2 * pid + (cross_clothes ? 1 : 0);
      r.camera_id = camera;
      if (split == Split::train) {
        const char lead = f.filename().string().empty() ? 'A' : f.filename().string()[0];
        r.camera_id = lead == 'B' ? 1 : (lead == 'C' ? 2 : 0);
        r.clothes_id = 2 * pid + (lead == 'C' ? 1 : 0);
      }
      r.split = split;
      records.push_back(std::move(r));
    }
  };
  add_dir(fs::path(root) / "train", Split::train, 0, false);
  add_dir(fs::path(root) / "test" / "A", Split::gallery, 0, false);
  add_dir(fs::path(root) / "test" / "B", Split::query, 1, false);
  add_dir(fs::path(root) / "test" / "C", Split::query, 2, true);
  if (records.empty()) throw IoError("no images found under PRCC-style root " + root);
  return build_index(root, std::move(records));
}

// Directory adapter for LTCC-style trees:
//   <root>/{train,query,test}/<pid>_<outfit>_c<cam>_<frame>.png
// Outfit indices are per identity in the source naming; they are remapped to
// globally unique clothes ids here.
DatasetIndex load_ltcc_like(const std::string& root) {
  std::vector<SampleRecord> records;
  std::map<std::pair<int, int>, int> outfit_map;
  auto parse_name = [&](const fs::path& f, Split split) {
    const std::string stem = f.stem().string();
    std::vector<std::string> tok;
    std::stringstream ss(stem);
    std::string part;
    while (std::getline(ss, part, '_')) tok.push_back(part);
    if (tok.size() < 3 || tok[2].size() < 2 || tok[2][0] != 'c') {
      throw ParseError("LTCC-style filename '" + f.filename().string() +
                       "' does not match <pid>_<outfit>_c<cam>_<frame>");
    }
    SampleRecord r;
    r.identity_id = std::stoi(tok[0]);
    const int outfit = std::stoi(tok[1]);
    auto [it, ins] =
        outfit_map.emplace(std::make_pair(r.identity_id, outfit), static_cast<int>(outfit_map.size()));
    (void)ins;
    r.clothes_id = it->second;
    r.camera_id = std::stoi(tok[2].substr(1));
    r.path = fs::relative(f, root).generic_string();
    r.split = split;
    records.push_back(std::move(r));
  };
  for (const auto& f : sorted_files(fs::path(root) / "train")) parse_name(f, Split::train);
  for (const auto& f : sorted_files(fs::path(root) / "query")) parse_name(f, Split::query);
  for (const auto& f : sorted_files(fs::path(root) / "test")) parse_name(f, Split::gallery);
  if (records.empty()) throw IoError("no images found under LTCC-style root " + root);
  return build_index(root, std::move(records));
}

}  // namespace

DatasetIndex load_dataset(const std::string& root, DatasetLayout layout) {
  if (!fs::exists(root)) throw IoError("dataset root does not exist: " + root);
  switch (layout) {
    case DatasetLayout::manifest:
    case DatasetLayout::synthetic:  // the synthetic generator writes manifest layout
      return load_manifest(root);
    case DatasetLayout::prcc_like: return load_prcc_like(root);
    case DatasetLayout::ltcc_like: return load_ltcc_like(root);
  }
  throw ConfigError("unhandled dataset layout");
}

void write_manifest(const std::string& root, const std::vector<SampleRecord>& records) {
  std::vector<SampleRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.path < b.path; });
  const fs::path manifest = fs::path(root) / "manifest.csv";
  std::ofstream out(manifest, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw IoError("cannot write manifest: " + manifest.string());
  out << "path,identity_id,clothes_id,camera_id,split\n";
  for (const auto& r : sorted) {
    out << r.path << ',' << r.identity_id << ',' << r.clothes_id << ',' << r.camera_id << ','
        << to_string(r.split) << '\n';
  }
}

std::string parsing_map_path(const std::string& parse_root, const std::string& image_rel_path) {
  fs::path rel(image_rel_path);
  rel.replace_extension(".png");
  return (fs::path(parse_root) / rel).generic_string();
}

}  // namespace ocreid
