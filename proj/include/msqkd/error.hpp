#pragma once

#include <stdexcept>
#include <string>

namespace msqkd {

// Input outside its documented domain (probabilities, amplitudes, sweep ranges).
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// A bound term with zero total weight was evaluated directly.
class DegenerateTerm : public std::invalid_argument {
public:
    explicit DegenerateTerm(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidNormalization : public std::invalid_argument {
public:
    explicit InvalidNormalization(const std::string& what) : std::invalid_argument(what) {}
};

// N == 0: no round is ever accepted, so no rate is defined.
class NoAcceptedRounds : public std::runtime_error {
public:
    NoAcceptedRounds() : std::runtime_error("no accepted rounds") {}
    explicit NoAcceptedRounds(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientData : public std::runtime_error {
public:
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

class DegenerateSample : public std::runtime_error {
public:
    explicit DegenerateSample(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msqkd
