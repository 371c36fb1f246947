// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <cstring>
#include <fstream>

#include "lrsdc/reference.hpp"

namespace lrsdc {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'S', 'D', 'C', 'R', 'E', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T* v) {
  is.read(reinterpret_cast<char*>(v), sizeof(T));
  return static_cast<bool>(is);
}

template <class S>
void save_impl(const std::string& path, const ReferenceSolution<S>& ref,
               std::uint8_t tag) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw InvalidInputError("save_reference: cannot open " + path);
  }
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put(os, tag);
  const std::uint64_t m1 = ref.states.empty() ? 0 : ref.states[0].rows();
  const std::uint64_t m2 = ref.states.empty() ? 0 : ref.states[0].cols();
  put(os, m1);
  put(os, m2);
  put(os, static_cast<std::uint64_t>(ref.times.size()));
  put(os, static_cast<std::uint64_t>(ref.steps));
  os.write(reinterpret_cast<const char*>(ref.times.data()),
           static_cast<std::streamsize>(ref.times.size() * sizeof(double)));
  for (const auto& st : ref.states) {
    os.write(reinterpret_cast<const char*>(st.data()),
             static_cast<std::streamsize>(st.size() * sizeof(S)));
  }
  if (!os) {
    throw InvalidInputError("save_reference: write failed for " + path);
  }
}

template <class S>
bool load_impl(const std::string& path, ReferenceSolution<S>* out,
               std::uint8_t expected_tag) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return false;
  std::uint32_t version = 0;
  std::uint8_t tag = 0;
  std::uint64_t m1 = 0, m2 = 0, count = 0, steps = 0;
  if (!get(is, &version) || version != kVersion) return false;
  if (!get(is, &tag) || tag != expected_tag) return false;
  if (!get(is, &m1) || !get(is, &m2) || !get(is, &count) || !get(is, &steps)) {
    return false;
  }
  out->times.resize(static_cast<Index>(count));
  is.read(reinterpret_cast<char*>(out->times.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  out->states.assign(count, DenseMatrix<S>(static_cast<Index>(m1),
                                           static_cast<Index>(m2)));
  for (auto& st : out->states) {
    is.read(reinterpret_cast<char*>(st.data()),
            static_cast<std::streamsize>(st.size() * sizeof(S)));
  }
  out->steps = static_cast<long>(steps);
  return static_cast<bool>(is);
}

}  // namespace

void save_reference(const std::string& path, const ReferenceSolution<Real>& ref) {
  save_impl(path, ref, 0);
}
void save_reference(const std::string& path,
                    const ReferenceSolution<Complex>& ref) {
  save_impl(path, ref, 1);
}
bool load_reference(const std::string& path, ReferenceSolution<Real>* out) {
  return load_impl(path, out, 0);
}
bool load_reference(const std::string& path, ReferenceSolution<Complex>* out) {
  return load_impl(path, out, 1);
}

}  // namespace lrsdc
