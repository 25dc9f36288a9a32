// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synthscan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by bad user input (malformed files, bad arguments).
class InputError : public Error {
public:
    using Error::Error;
};

class EmptyScene : public InputError {
public:
    EmptyScene() : InputError("scene contains no triangles") {}
};

class MalformedObj : public InputError {
public:
    MalformedObj(std::size_t line, const std::string& reason)
        : InputError("OBJ line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingFile : public InputError {
public:
    explicit MissingFile(const std::string& path) : InputError("missing file: " + path) {}
};

class GroundTooSmall : public InputError {
public:
    explicit GroundTooSmall(const std::string& what) : InputError("ground plane too small: " + what) {}
};

class MalformedSceneXml : public InputError {
public:
    MalformedSceneXml(const std::string& element, const std::string& reason)
        : InputError("scene XML <" + element + ">: " + reason), element_(element) {}
    const std::string& element() const noexcept { return element_; }

private:
    std::string element_;
};

class MissingAsset : public InputError {
public:
    explicit MissingAsset(const std::string& path) : InputError("missing asset: " + path) {}
};

class RotationUnsupported : public InputError {
public:
    RotationUnsupported() : InputError("rotation filters are not supported; parts must lie flat") {}
};

class MalformedSurveyXml : public InputError {
public:
    MalformedSurveyXml(const std::string& element, const std::string& reason)
        : InputError("survey XML <" + element + ">: " + reason), element_(element) {}
    const std::string& element() const noexcept { return element_; }

private:
    std::string element_;
};

class NoLegs : public InputError {
public:
    NoLegs() : InputError("survey has no legs") {}
};

class UnknownPreset : public InputError {
public:
    explicit UnknownPreset(const std::string& name) : InputError("unknown scanner preset: " + name) {}
};

class InvalidSettings : public InputError {
public:
    explicit InvalidSettings(const std::string& reason) : InputError("invalid scanner settings: " + reason) {}
};

class MalformedXyz : public InputError {
public:
    MalformedXyz(std::size_t line, const std::string& reason)
        : InputError("point file line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyCloud : public InputError {
public:
    EmptyCloud() : InputError("point cloud is empty") {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("I/O error: " + what) {}
};

} // namespace synthscan
