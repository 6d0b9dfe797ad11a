#include "sieve/service/run_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sieve/errors.hpp"

namespace sieve::service {

namespace fs = std::filesystem;
using nlohmann::json;
using protocol::RunRecord;

namespace {

std::uint64_t id_number(const std::string& id) {
  const auto dash = id.rfind('-');
  if (dash == std::string::npos) return 0;
  try {
    return std::stoull(id.substr(dash + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

void write_all_synced(const fs::path& p, const std::string& data, int flags) {
  const int fd = ::open(p.c_str(), flags, 0644);
  if (fd < 0) throw std::runtime_error("cannot open " + p.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw std::runtime_error("write to " + p.string() + " failed: " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

RunStore::RunStore(fs::path dir, int index_every)
    : dir_(std::move(dir)), log_(dir_ / "runs.jsonl"), index_(dir_ / "runs.index.json"), index_every_(index_every) {
  fs::create_directories(dir_);
  replay();
}

void RunStore::absorb(const json& line, std::uint64_t offset) {
  const auto kind = line.at("kind").get<std::string>();
  auto rec = protocol::run_record_from_json(line.at("record"));
  next_ = std::max(next_, id_number(rec.id) + 1);
  if (kind == "started") {
    open_[rec.id] = std::move(rec);
  } else if (kind == "record") {
    open_.erase(rec.id);
    offsets_[rec.id] = offset;
    records_[rec.id] = std::move(rec);
  }
}

void RunStore::replay() {
  std::uint64_t start = 0;
  const std::uint64_t size = fs::exists(log_) ? fs::file_size(log_) : 0;

  if (fs::exists(index_)) {
    try {
      std::ifstream in(index_);
      const auto idx = json::parse(in);
      const auto bytes = idx.at("log_bytes").get<std::uint64_t>();
      if (bytes <= size) {
        std::ifstream log(log_, std::ios::binary);
        for (const auto& [id, off] : idx.at("offsets").items()) {
          log.seekg(static_cast<std::streamoff>(off.get<std::uint64_t>()));
          std::string line;
          std::getline(log, line);
          absorb(json::parse(line), off.get<std::uint64_t>());
        }
        for (const auto& r : idx.at("open")) absorb({{"kind", "started"}, {"record", r}}, 0);
        next_ = std::max(next_, idx.at("next").get<std::uint64_t>());
        start = bytes;
      }
    } catch (const std::exception&) {
      // A stale or damaged index only costs a full replay.
      records_.clear();
      offsets_.clear();
      open_.clear();
      next_ = 1;
      start = 0;
    }
  }

  std::uint64_t good = start;
  replayed_ = 0;
  torn_ = 0;
  if (size > start) {
    std::ifstream log(log_, std::ios::binary);
    log.seekg(static_cast<std::streamoff>(start));
    std::string buf((std::istreambuf_iterator<char>(log)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < buf.size()) {
      const auto nl = buf.find('\n', pos);
      if (nl == std::string::npos) {
        ++torn_;  // unterminated tail
        break;
      }
      const auto line = buf.substr(pos, nl - pos);
      try {
        absorb(json::parse(line), start + pos);
        ++replayed_;
      } catch (const std::exception&) {
        ++torn_;
      }
      pos = nl + 1;
      good = start + pos;
    }
  }
  if (good < size) fs::resize_file(log_, good);
  log_bytes_ = good;

  // Runs that were in flight when the service stopped.
  auto interrupted = std::move(open_);
  open_.clear();
  for (auto& [id, r] : interrupted) {
    r.status = protocol::RunStatus::Faulted;
    r.reason = "service stopped during the run";
    append_record(r);
  }
}

void RunStore::append_line(const std::string& line) {
  write_all_synced(log_, line + "\n", O_WRONLY | O_APPEND | O_CREAT);
  log_bytes_ += line.size() + 1;
}

void RunStore::write_index() {
  json offsets = json::object();
  for (const auto& [id, off] : offsets_) offsets[id] = off;
  json open = json::array();
  for (const auto& [id, r] : open_) open.push_back(protocol::to_json(r));
  const json idx = {{"log_bytes", log_bytes_}, {"next", next_}, {"offsets", offsets}, {"open", open}};
  const auto tmp = index_.string() + ".tmp";
  write_all_synced(tmp, idx.dump(), O_WRONLY | O_CREAT | O_TRUNC);
  fs::rename(tmp, index_);
}

std::string RunStore::next_id() {
  std::lock_guard lock(mu_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "run-%06llu", static_cast<unsigned long long>(next_++));
  return buf;
}

void RunStore::append_started(const RunRecord& r) {
  std::lock_guard lock(mu_);
  if (records_.count(r.id) || open_.count(r.id)) throw ConfigError("duplicate run id " + r.id);
  append_line(json{{"kind", "started"}, {"record", protocol::to_json(r)}}.dump());
  open_[r.id] = r;
  next_ = std::max(next_, id_number(r.id) + 1);
}

void RunStore::append_record(const RunRecord& r) {
  if (!protocol::is_terminal(r.status)) throw ConfigError("only terminal records are stored");
  std::lock_guard lock(mu_);
  if (records_.count(r.id)) throw ConfigError("run " + r.id + " is already terminal");
  const auto offset = log_bytes_;
  append_line(json{{"kind", "record"}, {"record", protocol::to_json(r)}}.dump());
  records_[r.id] = r;
  offsets_[r.id] = offset;
  open_.erase(r.id);
  next_ = std::max(next_, id_number(r.id) + 1);
  if (++since_index_ >= index_every_) {
    write_index();
    since_index_ = 0;
  }
}

RunRecord RunStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (auto it = records_.find(id); it != records_.end()) return it->second;
  if (auto it = open_.find(id); it != open_.end()) return it->second;
  throw NotFound("run " + id + " not found");
}

std::vector<RunRecord> RunStore::list(const RunFilter& f) const {
  std::lock_guard lock(mu_);
  std::map<std::string, const RunRecord*> all;
  for (const auto& [id, r] : records_) all[id] = &r;
  for (const auto& [id, r] : open_) all[id] = &r;
  std::vector<RunRecord> out;
  for (const auto& [id, r] : all) {
    if (f.profile && r->profile != *f.profile) continue;
    if (f.protocol && r->protocol != *f.protocol) continue;
    if (f.status && r->status != *f.status) continue;
    out.push_back(*r);
  }
  return out;
}

std::size_t RunStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size() + open_.size();
}

}  // namespace sieve::service
