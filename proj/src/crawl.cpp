#include "moltpipe/crawl.hpp"

#include "moltpipe/text.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <thread>
#include <unordered_set>

#include <httplib.h>

namespace moltpipe {

std::string_view feed_name(Feed feed) {
    switch (feed) {
        case Feed::Top: return "top";
        case Feed::New: return "new";
        case Feed::Discussed: return "discussed";
    }
    return "top";
}

std::int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

namespace {

class HttplibClient : public HttpClient {
public:
    HttpResponse get(const std::string& url,
                     const std::vector<std::pair<std::string, std::string>>& headers) override {
        // Split "http://host:port" from the path.
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return {0, "", "bad url: " + url};
        auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
        httplib::Client cli(origin);
        cli.set_connection_timeout(10);
        cli.set_read_timeout(30);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = cli.Get(path, h);
        if (!res) return {0, "", httplib::to_string(res.error())};
        return {res->status, res->body, ""};
    }
};

}  // namespace

std::unique_ptr<HttpClient> make_httplib_client() { return std::make_unique<HttplibClient>(); }

CrawlError::CrawlError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}

Json CrawlLog::to_json() const {
    Json j = Json::object();
    j["retries"] = retries;
    j["skipped"] = skipped;
    j["fetched"] = fetched;
    Json ev = Json::array();
    for (const auto& e : events)
        ev.push_back({{"time_ms", e.time_ms}, {"kind", e.kind}, {"detail", e.detail}});
    j["events"] = ev;
    return j;
}

namespace {

void log_event(CrawlLog* log, Clock& clock, const std::string& kind, const std::string& detail) {
    if (log) log->events.push_back({clock.now_ms(), kind, detail});
}

std::vector<std::pair<std::string, std::string>> request_headers(const CrawlConfig& config) {
    std::vector<std::pair<std::string, std::string>> h = {{"User-Agent", config.user_agent}};
    if (config.bearer_token) h.emplace_back("Authorization", "Bearer " + *config.bearer_token);
    return h;
}

// GET with retry. Backoff: base 500 ms, factor 2, jitter +-20%, at most
// max_retries additional attempts. Jitter is derived deterministically from
// the seed and the url so simulated-clock runs reproduce exactly.
HttpResponse get_with_retry(const std::string& url, const CrawlConfig& config, HttpClient& client,
                            Clock& clock, CrawlLog* log) {
    const auto headers = request_headers(config);
    HttpResponse res;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::int64_t delay = 500;
            for (int k = 1; k < attempt; ++k) delay *= 2;
            const std::uint64_t h =
                fnv1a64(url + "#" + std::to_string(attempt) + "#" +
                        std::to_string(config.retry_jitter_seed));
            const double jitter = 0.8 + 0.4 * (static_cast<double>(h % 10000) / 10000.0);
            clock.sleep_ms(static_cast<std::int64_t>(static_cast<double>(delay) * jitter));
            if (log) ++log->retries;
            log_event(log, clock, "retry", url + " attempt " + std::to_string(attempt + 1));
        }
        res = client.get(url, headers);
        if (res.status != 0 && res.status < 500) return res;
    }
    return res;
}

}  // namespace

std::vector<std::string> paginate_feed(Feed feed, const CrawlConfig& config, HttpClient& client,
                                       Clock& clock, CrawlLog* log) {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::string> seen_cursors;
    std::string cursor;
    while (true) {
        std::string url = config.base_url + "/feed/" + std::string(feed_name(feed));
        if (!cursor.empty()) url += "?cursor=" + cursor;
        const HttpResponse res = get_with_retry(url, config, client, clock, log);
        if (res.status == 0)
            throw CrawlError(CrawlError::Kind::NetworkError,
                             "network-error fetching " + url + ": " + res.error);
        if (res.status != 200)
            throw CrawlError(CrawlError::Kind::MalformedPage,
                             "unexpected status " + std::to_string(res.status) + " for " + url);
        Json j = Json::parse(res.body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("post_ids") ||
            !j["post_ids"].is_array())
            throw CrawlError(CrawlError::Kind::MalformedPage, "malformed feed page at " + url);
        std::size_t page_count = 0;
        for (const auto& id : j["post_ids"]) {
            if (!id.is_string())
                throw CrawlError(CrawlError::Kind::MalformedPage, "non-string id at " + url);
            ++page_count;
            if (seen_ids.insert(id.get<std::string>()).second)
                ids.push_back(id.get<std::string>());
        }
        log_event(log, clock, "page",
                  std::string(feed_name(feed)) + " cursor=\"" + cursor + "\" ids=" +
                      std::to_string(page_count));
        const bool has_more = j.value("has_more", false);
        if (!has_more) break;
        const std::string next = j.value("next_cursor", "");
        if (!seen_cursors.insert(next).second || next == cursor)
            throw CrawlError(CrawlError::Kind::CursorLoop,
                             "cursor-loop on feed " + std::string(feed_name(feed)) +
                                 ": cursor \"" + next + "\" repeated");
        cursor = next;
    }
    return ids;
}

PostRecord fetch_post(const std::string& post_id, const CrawlConfig& config, HttpClient& client,
                      Clock& clock, CrawlLog* log) {
    const std::string url = config.base_url + "/post/" + post_id;
    const HttpResponse res = get_with_retry(url, config, client, clock, log);
    if (res.status == 0)
        throw CrawlError(CrawlError::Kind::NetworkError,
                         "network-error fetching " + url + ": " + res.error);
    if (res.status == 404)
        throw CrawlError(CrawlError::Kind::MalformedPage, "not-found: " + post_id);
    if (res.status != 200)
        throw CrawlError(CrawlError::Kind::MalformedPage,
                         "unexpected status " + std::to_string(res.status) + " for " + url);
    try {
        return parse_post(res.body);
    } catch (const ParseError& e) {
        throw CrawlError(CrawlError::Kind::MalformedPage,
                         "malformed post page for " + post_id + ": " + e.what());
    }
}

CrawlResult crawl(const CrawlConfig& config, HttpClient& client, Clock& clock) {
    CrawlResult result;
    CrawlLog& log = result.log;

    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (Feed feed : {Feed::Top, Feed::New, Feed::Discussed}) {
        for (auto& id : paginate_feed(feed, config, client, clock, &log)) {
            if (seen.insert(id).second) ids.push_back(std::move(id));
        }
    }
    result.corpus.meta.feeds = {"top", "new", "discussed"};
    result.corpus.meta.window_start = config.window_start;
    result.corpus.meta.window_end = config.window_end;

    const std::optional<std::int64_t> window_start =
        config.window_start ? std::optional(parse_iso8601(*config.window_start)) : std::nullopt;
    const std::optional<std::int64_t> window_end =
        config.window_end ? std::optional(parse_iso8601(*config.window_end)) : std::nullopt;

    std::int64_t next_batch_start = clock.now_ms();
    for (std::size_t batch_begin = 0; batch_begin < ids.size();
         batch_begin += static_cast<std::size_t>(config.batch_size)) {
        const std::int64_t now = clock.now_ms();
        if (now < next_batch_start) clock.sleep_ms(next_batch_start - now);
        next_batch_start = clock.now_ms() + config.inter_batch_delay_ms;
        const std::size_t batch_end =
            std::min(ids.size(), batch_begin + static_cast<std::size_t>(config.batch_size));
        log_event(&log, clock, "batch",
                  "posts " + std::to_string(batch_begin) + ".." + std::to_string(batch_end));

        struct Slot {
            std::optional<PostRecord> record;
            std::optional<std::string> error;
            CrawlLog log;
        };
        std::vector<Slot> slots(batch_end - batch_begin);
        std::vector<std::thread> workers;
        for (std::size_t k = batch_begin; k < batch_end; ++k) {
            workers.emplace_back([&, k] {
                Slot& slot = slots[k - batch_begin];
                try {
                    slot.record = fetch_post(ids[k], config, client, clock, &slot.log);
                } catch (const CrawlError& e) {
                    slot.error = e.what();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (std::size_t k = batch_begin; k < batch_end; ++k) {
            Slot& slot = slots[k - batch_begin];
            log.retries += slot.log.retries;
            for (auto& e : slot.log.events) log.events.push_back(std::move(e));
            if (slot.record) {
                const std::int64_t ts = slot.record->created_at_epoch;
                if ((window_start && ts < *window_start) || (window_end && ts >= *window_end)) {
                    log_event(&log, clock, "skip", ids[k] + " outside window");
                    continue;
                }
                ++log.fetched;
                log_event(&log, clock, "fetch", ids[k]);
                result.corpus.posts.push_back(std::move(*slot.record));
            } else {
                ++log.skipped;
                result.partial = true;
                log_event(&log, clock, "skip", ids[k] + ": " + *slot.error);
            }
        }
    }

    std::sort(result.corpus.posts.begin(), result.corpus.posts.end(),
              [](const PostRecord& a, const PostRecord& b) {
                  if (a.created_at_epoch != b.created_at_epoch)
                      return a.created_at_epoch < b.created_at_epoch;
                  return a.post_id < b.post_id;
              });
    return result;
}

}  // namespace moltpipe
