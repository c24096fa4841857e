#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ocreid {

enum class Split { train, query, gallery };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SampleRecord {
  std::string path;  // relative to the dataset root
  int identity_id = 0;
  int clothes_id = 0;
  int camera_id = 0;
  Split split = Split::train;
};

enum class DatasetLayout { manifest, prcc_like, ltcc_like, synthetic };

DatasetLayout layout_from_string(const std::string& s);
std::string to_string(DatasetLayout l);

struct DatasetIndex {
  std::string root;
  std::vector<SampleRecord> records;
  int num_identities = 0;
  int num_clothes = 0;
  std::map<int, std::set<int>> clothes_of_identity;

  // Raw label -> dense class index, for classifier head sizing.
  std::map<int, int> identity_class;
  std::map<int, int> clothes_class;

  std::vector<int> split_indices(Split s) const;
  int identity_class_of(int identity_id) const;
  int clothes_class_of(int clothes_id) const;
};

// Loads a dataset and verifies label integrity. Record order is
// deterministic: lexicographic by relative path.
DatasetIndex load_dataset(const std::string& root, DatasetLayout layout);

// Builds the index from in-memory records (used by tests and by the
// synthetic generator). Performs the same integrity checks as load_dataset.
DatasetIndex build_index(const std::string& root, std::vector<SampleRecord> records);

void write_manifest(const std::string& root, const std::vector<SampleRecord>& records);

// Path of the parsing map paired with an image, under a parsing root:
// <parse_root>/<relative image path with extension replaced by .png>.
std::string parsing_map_path(const std::string& parse_root, const std::string& image_rel_path);

}  // namespace ocreid
