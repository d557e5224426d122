#pragma once

#include <stdexcept>
#include <string>

namespace triage {

/// Base class of every error raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TRIAGE_DEFINE_ERROR(Name, Base)        \
    class Name : public Base {                 \
    public:                                    \
        using Base::Base;                      \
    };

// core model
TRIAGE_DEFINE_ERROR(MalformedCweId, Error)
TRIAGE_DEFINE_ERROR(ScoreOutOfRange, Error)
TRIAGE_DEFINE_ERROR(MalformedRecord, Error)

// cvss
TRIAGE_DEFINE_ERROR(SentinelScore, Error)
TRIAGE_DEFINE_ERROR(LabelNotInScheme, Error)
TRIAGE_DEFINE_ERROR(UnknownCvssVersion, Error)
TRIAGE_DEFINE_ERROR(InvalidScheme, Error)

// ingestion
TRIAGE_DEFINE_ERROR(FeedSyntaxError, Error)
TRIAGE_DEFINE_ERROR(DiffSyntaxError, Error)
TRIAGE_DEFINE_ERROR(FetchError, Error)
TRIAGE_DEFINE_ERROR(NotACommitUrl, FetchError)
TRIAGE_DEFINE_ERROR(TransportTimeout, FetchError)
TRIAGE_DEFINE_ERROR(SampleTooLarge, Error)

// code extraction
TRIAGE_DEFINE_ERROR(ParseFailure, Error)

// ground truth
TRIAGE_DEFINE_ERROR(MissingCve, Error)
TRIAGE_DEFINE_ERROR(MissingSeverityForVersion, Error)
TRIAGE_DEFINE_ERROR(EmptyCweGroundTruth, Error)

// prompting
TRIAGE_DEFINE_ERROR(MissingGranularity, Error)
TRIAGE_DEFINE_ERROR(TemplateError, Error)

// inference
TRIAGE_DEFINE_ERROR(ProviderError, Error)
TRIAGE_DEFINE_ERROR(TimeoutError, ProviderError)
TRIAGE_DEFINE_ERROR(TransientProviderError, ProviderError)  // worth retrying: 429, 5xx, dropped connection
TRIAGE_DEFINE_ERROR(FormatViolation, Error)

// evaluation / io
TRIAGE_DEFINE_ERROR(EmptyEvaluationSet, Error)
TRIAGE_DEFINE_ERROR(IoError, Error)
TRIAGE_DEFINE_ERROR(ConfigError, Error)

#undef TRIAGE_DEFINE_ERROR

/// Raised when the commit host signals that the request quota is exhausted.
/// Carries the number of seconds the host asked us to wait, when it said so.
class RateLimited : public FetchError {
public:
    RateLimited(const std::string& what, long retry_after_seconds)
        : FetchError(what), retry_after_seconds_(retry_after_seconds) {}

    long retry_after_seconds() const noexcept { return retry_after_seconds_; }

private:
    long retry_after_seconds_;
};

}  // namespace triage
