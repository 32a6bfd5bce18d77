#include "subprocess.hpp"

#include <boost/asio/io_context.hpp>
#include <boost/process.hpp>
#include <future>

#include <sys/wait.h>

namespace bp = boost::process;

namespace datavideo::detail {

CommandResult run_command(const std::string& command, const std::string& input, std::chrono::milliseconds timeout) {
    boost::asio::io_context io;
    std::future<std::string> out;
    std::future<std::string> err;
    bp::child child("/bin/sh", "-c", command, bp::std_in < boost::asio::buffer(input), bp::std_out > out,
                    bp::std_err > err, io);
    io.run_for(timeout);

    CommandResult result;
    if (!io.stopped()) {
        result.timed_out = true;
        std::error_code ec;
        child.terminate(ec);
        io.stop();
        return result;
    }
    child.wait();
    // report a signal the way a shell would: 128 + signal number
    const int status = child.native_exit_code();
    result.exit_code = WIFSIGNALED(status) ? 128 + WTERMSIG(status) : WEXITSTATUS(status);
    result.out = out.get();
    result.err = err.get();
    return result;
}

std::string shell_quote(const std::string& text) {
    std::string out = "'";
    for (char c : text) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

}  // namespace datavideo::detail
