// Test child for the external model protocol. Replies q = p[0].
//
//   qoi_child            echo p[0]
//   qoi_child die        exit on the first request
//   qoi_child garbage    reply with text that is not JSON
//   qoi_child silent     never reply

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "echo";
    std::string line;
    while (std::getline(std::cin, line)) {
        if (mode == "die") return 7;
        if (mode == "silent") {
            std::this_thread::sleep_for(std::chrono::seconds(30));
            return 0;
        }
        if (mode == "garbage") {
            std::cout << "not json" << std::endl;
            continue;
        }
        const auto req = nlohmann::json::parse(line);
        nlohmann::json rep = {{"id", req["id"]}, {"q", req["p"][0]}};
        std::cout << rep.dump() << std::endl;
    }
    return 0;
}
