#include <curl/curl.h>

#include <cstdio>
#include <mutex>
#include <sstream>

#include "specmon/error.hpp"
#include "specmon/transfer.hpp"

namespace specmon {

namespace fs = std::filesystem;

namespace {

std::once_flag g_curl_init;

TransferPhase phase_of(CURLcode code) {
  switch (code) {
    case CURLE_COULDNT_RESOLVE_HOST:
    case CURLE_COULDNT_RESOLVE_PROXY:
    case CURLE_COULDNT_CONNECT:
    case CURLE_OPERATION_TIMEDOUT:
    case CURLE_FTP_WEIRD_SERVER_REPLY:
    case CURLE_FTP_PORT_FAILED:
    case CURLE_FTP_CANT_GET_HOST:
    case CURLE_RECV_ERROR:
      return TransferPhase::connect;
    case CURLE_LOGIN_DENIED:
    case CURLE_REMOTE_ACCESS_DENIED:
      return TransferPhase::auth;
    case CURLE_UPLOAD_FAILED:
    case CURLE_WRITE_ERROR:
    case CURLE_QUOTE_ERROR:
    case CURLE_SEND_ERROR:
    case CURLE_REMOTE_DISK_FULL:
    case CURLE_READ_ERROR:
      return TransferPhase::write;
    default:
      return TransferPhase::read;
  }
}

struct CurlList {
  curl_slist* head = nullptr;
  ~CurlList() { curl_slist_free_all(head); }
  void add(const std::string& s) { head = curl_slist_append(head, s.c_str()); }
};

size_t write_to_string(char* ptr, size_t size, size_t nmemb, void* userdata) {
  static_cast<std::string*>(userdata)->append(ptr, size * nmemb);
  return size * nmemb;
}

size_t discard(char*, size_t size, size_t nmemb, void*) { return size * nmemb; }

std::string url_escape_path(CURL* curl, const std::string& path) {
  std::string out;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    const auto seg = path.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
    char* e = curl_easy_escape(curl, seg.c_str(), static_cast<int>(seg.size()));
    out += e;
    curl_free(e);
    if (slash == std::string::npos) break;
    out += '/';
    start = slash + 1;
  }
  return out;
}

}  // namespace

struct FtpClient::Impl {
  TransferEndpoint endpoint;
  CURL* curl = nullptr;

  std::string url_for(const std::string& remote, bool dir) {
    std::string base = endpoint.address;
    if (base.empty() || base.back() != '/') base += '/';
    auto path = url_escape_path(curl, remote_join(endpoint.base_path, remote));
    if (dir && !path.empty()) path += '/';
    return base + path;
  }

  void reset() {
    curl_easy_reset(curl);
    if (!endpoint.username.empty()) {
      curl_easy_setopt(curl, CURLOPT_USERNAME, endpoint.username.c_str());
      curl_easy_setopt(curl, CURLOPT_PASSWORD, endpoint.password.c_str());
    }
    curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 10L);
    curl_easy_setopt(curl, CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, discard);
  }

  void perform(const std::string& what) {
    const CURLcode rc = curl_easy_perform(curl);
    if (rc != CURLE_OK) throw TransferError(phase_of(rc), what + ": " + curl_easy_strerror(rc));
  }
};

FtpClient::FtpClient(TransferEndpoint endpoint) : impl_(std::make_unique<Impl>()) {
  std::call_once(g_curl_init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  impl_->endpoint = std::move(endpoint);
  impl_->curl = curl_easy_init();
  if (!impl_->curl) throw TransferError(TransferPhase::connect, "curl_easy_init failed");
}

FtpClient::~FtpClient() {
  if (impl_ && impl_->curl) curl_easy_cleanup(impl_->curl);
}

void FtpClient::put_file(const fs::path& local, const std::string& remote) {
  std::FILE* f = std::fopen(local.c_str(), "rb");
  if (!f) throw TransferError(TransferPhase::read, "cannot read local file " + local.string());
  const auto size = fs::file_size(local);
  const auto slash = remote.rfind('/');
  const std::string dir = slash == std::string::npos ? "" : remote.substr(0, slash);
  const std::string name = slash == std::string::npos ? remote : remote.substr(slash + 1);
  const std::string tmp = ".tmp.upload." + name;

  impl_->reset();
  CurlList post;
  post.add("RNFR " + tmp);
  post.add("RNTO " + name);
  const auto url = impl_->url_for(remote_join(dir, tmp), false);
  curl_easy_setopt(impl_->curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(impl_->curl, CURLOPT_UPLOAD, 1L);
  curl_easy_setopt(impl_->curl, CURLOPT_READDATA, f);
  curl_easy_setopt(impl_->curl, CURLOPT_INFILESIZE_LARGE, static_cast<curl_off_t>(size));
  curl_easy_setopt(impl_->curl, CURLOPT_FTP_CREATE_MISSING_DIRS, static_cast<long>(CURLFTP_CREATE_DIR_RETRY));
  curl_easy_setopt(impl_->curl, CURLOPT_POSTQUOTE, post.head);
  try {
    impl_->perform("put " + remote);
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
}

std::vector<RemoteEntry> FtpClient::list(const std::string& prefix) {
  impl_->reset();
  std::string body;
  const auto url = impl_->url_for(prefix, true);
  curl_easy_setopt(impl_->curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(impl_->curl, CURLOPT_DIRLISTONLY, 1L);
  curl_easy_setopt(impl_->curl, CURLOPT_WRITEFUNCTION, write_to_string);
  curl_easy_setopt(impl_->curl, CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(impl_->curl);
  if (rc == CURLE_REMOTE_ACCESS_DENIED || rc == CURLE_REMOTE_FILE_NOT_FOUND) {
    // CWD into a missing directory: nothing uploaded there yet.
    return {};
  }
  if (rc != CURLE_OK) throw TransferError(phase_of(rc), "list " + prefix + ": " + curl_easy_strerror(rc));

  std::vector<RemoteEntry> out;
  std::istringstream lines(body);
  std::string name;
  while (std::getline(lines, name)) {
    if (!name.empty() && name.back() == '\r') name.pop_back();
    const auto slash = name.rfind('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    if (name.empty() || name.starts_with(".tmp.")) continue;
    const auto path = remote_join(prefix, name);
    impl_->reset();
    const auto furl = impl_->url_for(path, false);
    curl_easy_setopt(impl_->curl, CURLOPT_URL, furl.c_str());
    curl_easy_setopt(impl_->curl, CURLOPT_NOBODY, 1L);
    curl_easy_setopt(impl_->curl, CURLOPT_FILETIME, 1L);
    if (curl_easy_perform(impl_->curl) != CURLE_OK) continue;  // a directory, or vanished meanwhile
    curl_off_t ft = -1;
    curl_off_t len = -1;
    curl_easy_getinfo(impl_->curl, CURLINFO_FILETIME_T, &ft);
    curl_easy_getinfo(impl_->curl, CURLINFO_CONTENT_LENGTH_DOWNLOAD_T, &len);
    if (ft < 0) continue;
    out.push_back(RemoteEntry{path, len < 0 ? 0u : static_cast<std::uint64_t>(len),
                              from_unix_us(static_cast<std::int64_t>(ft) * 1'000'000)});
  }
  std::sort(out.begin(), out.end(), [](const RemoteEntry& a, const RemoteEntry& b) { return a.path < b.path; });
  return out;
}

Timestamp FtpClient::mtime(const std::string& remote) {
  impl_->reset();
  const auto url = impl_->url_for(remote, false);
  curl_easy_setopt(impl_->curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(impl_->curl, CURLOPT_NOBODY, 1L);
  curl_easy_setopt(impl_->curl, CURLOPT_FILETIME, 1L);
  impl_->perform("mtime " + remote);
  curl_off_t ft = -1;
  curl_easy_getinfo(impl_->curl, CURLINFO_FILETIME_T, &ft);
  if (ft < 0) throw TransferError(TransferPhase::read, "server did not report a modification time for " + remote);
  return from_unix_us(static_cast<std::int64_t>(ft) * 1'000'000);
}

bool FtpClient::reachable() {
  try {
    impl_->reset();
    // login + listing of the server root; the base path may not exist before the first upload
    auto url = impl_->endpoint.address;
    if (url.empty() || url.back() != '/') url += '/';
    curl_easy_setopt(impl_->curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(impl_->curl, CURLOPT_DIRLISTONLY, 1L);
    impl_->perform("probe");
    return true;
  } catch (const TransferError&) {
    return false;
  }
}

}  // namespace specmon
