#pragma once

#include "moltpipe/record.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace moltpipe {

enum class Feed { Top, New, Discussed };
std::string_view feed_name(Feed feed);  // "top" | "new" | "discussed"

struct FeedPage {
    Feed feed = Feed::Top;
    std::string page_token;  // cursor for the NEXT page; opaque
    std::vector<std::string> post_ids;
    bool has_more = false;
};

struct CrawlConfig {
    std::string base_url;
    int batch_size = 4;
    std::int64_t inter_batch_delay_ms = 1000;
    std::optional<std::string> window_start;  // ISO-8601, inclusive
    std::optional<std::string> window_end;    // exclusive
    int max_retries = 3;
    std::string user_agent = "moltpipe/1.0";
    std::optional<std::string> bearer_token;  // off by default
    std::uint64_t retry_jitter_seed = 0;
};

struct HttpResponse {
    int status = 0;  // 0 = network error (no response)
    std::string body;
    std::string error;  // populated when status == 0
};

class HttpClient {
public:
    virtual ~HttpClient() = default;
    virtual HttpResponse get(const std::string& url,
                             const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
};

// Real HTTP transport (cpp-httplib).
std::unique_ptr<HttpClient> make_httplib_client();

struct CrawlEvent {
    std::int64_t time_ms = 0;
    std::string kind;  // "fetch", "retry", "skip", "page", "error", "batch"
    std::string detail;
};

struct CrawlLog {
    std::vector<CrawlEvent> events;
    std::size_t retries = 0;
    std::size_t skipped = 0;
    std::size_t fetched = 0;

    Json to_json() const;
};

struct CrawlError : std::runtime_error {
    enum class Kind { NetworkError, MalformedPage, CursorLoop };
    Kind kind;
    CrawlError(Kind k, const std::string& msg);
};

// Paginates one feed to exhaustion. Ids deduplicated preserving first
// occurrence; aborts on a repeated cursor.
std::vector<std::string> paginate_feed(Feed feed, const CrawlConfig& config, HttpClient& client,
                                       Clock& clock, CrawlLog* log = nullptr);

PostRecord fetch_post(const std::string& post_id, const CrawlConfig& config, HttpClient& client,
                      Clock& clock, CrawlLog* log = nullptr);

struct CrawlResult {
    Corpus corpus;
    CrawlLog log;
    bool partial = false;  // some posts were skipped
};

// All three feeds, then batched fetches under the rate contract: at most
// batch_size requests in flight, consecutive batch starts separated by at
// least inter_batch_delay.
CrawlResult crawl(const CrawlConfig& config, HttpClient& client, Clock& clock);

}  // namespace moltpipe
