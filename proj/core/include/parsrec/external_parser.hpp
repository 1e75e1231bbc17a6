#pragma once

#include <string>
#include <vector>

#include "parsrec/parsers.hpp"

namespace parsrec {

// One child process speaking the line-delimited JSON protocol:
//   request  {"id": "<ref_id>", "ref": "<raw string>"}
//   response {"id": "<ref_id>", "fields": [{"type": "year", "value": "2008"}, ...]}
// one object per line on stdin/stdout, matched by id. A crash, timeout or
// malformed response yields a failed outcome; the process is respawned on
// the next request. Unknown field types in responses are dropped with a
// warning on stderr.
class ExternalParserProcess {
public:
    ExternalParserProcess(std::vector<std::string> command, int timeout_ms);
    ~ExternalParserProcess();

    ExternalParserProcess(const ExternalParserProcess&) = delete;
    ExternalParserProcess& operator=(const ExternalParserProcess&) = delete;

    ParseOutcome request(const std::string& ref_id, const std::string& raw);

    bool alive() const { return pid_ > 0; }

private:
    bool spawn();
    void shutdown();
    bool write_line(const std::string& line);
    // Reads one full line within the deadline; false on timeout/EOF.
    bool read_line(std::string& line, int timeout_ms);

    std::vector<std::string> command_;
    int timeout_ms_;
    long pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    std::string buffer_;
};

}  // namespace parsrec
