#pragma once

#include <doctest.h>

#include <functional>
#include <string>

// Runs f, expects it to throw E, and returns the message ("" if nothing was thrown).
template <typename E>
std::string thrown_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}
