// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::ast::Span;

/// Stable diagnostic codes. `E0xx` are syntax errors, `E1xx` semantic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    UnexpectedChar,
    UnexpectedToken,
    UnclosedDelimiter,
    MissingSemicolon,
    UnknownKeyword,
    DuplicateIdentifier,
    BadNumber,
    UnexpectedEof,
    EmptyDocument,
    UnmatchedCloser,
    UnknownIdentifier,
    DimensionMismatch,
    TypeError,
    NotAProjector,
    NonUnitary,
    BadTimes,
    MissingDynamics,
    InconsistentFramework,
    InvalidDecomposition,
    SpaceDeclaration,
    InvalidDensity,
    InvalidData,
    UnexpectedConsistency,
    NumericDomain,
    ZeroVector,
    NonCommuting,
    ArgumentCount,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 27] = [
        ErrorCode::UnexpectedChar,
        ErrorCode::UnexpectedToken,
        ErrorCode::UnclosedDelimiter,
        ErrorCode::MissingSemicolon,
        ErrorCode::UnknownKeyword,
        ErrorCode::DuplicateIdentifier,
        ErrorCode::BadNumber,
        ErrorCode::UnexpectedEof,
        ErrorCode::EmptyDocument,
        ErrorCode::UnmatchedCloser,
        ErrorCode::UnknownIdentifier,
        ErrorCode::DimensionMismatch,
        ErrorCode::TypeError,
        ErrorCode::NotAProjector,
        ErrorCode::NonUnitary,
        ErrorCode::BadTimes,
        ErrorCode::MissingDynamics,
        ErrorCode::InconsistentFramework,
        ErrorCode::InvalidDecomposition,
        ErrorCode::SpaceDeclaration,
        ErrorCode::InvalidDensity,
        ErrorCode::InvalidData,
        ErrorCode::UnexpectedConsistency,
        ErrorCode::NumericDomain,
        ErrorCode::ZeroVector,
        ErrorCode::NonCommuting,
        ErrorCode::ArgumentCount,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::UnexpectedChar => "E001",
            ErrorCode::UnexpectedToken => "E002",
            ErrorCode::UnclosedDelimiter => "E003",
            ErrorCode::MissingSemicolon => "E004",
            ErrorCode::UnknownKeyword => "E005",
            ErrorCode::DuplicateIdentifier => "E006",
            ErrorCode::BadNumber => "E007",
            ErrorCode::UnexpectedEof => "E008",
            ErrorCode::EmptyDocument => "E009",
            ErrorCode::UnmatchedCloser => "E010",
            ErrorCode::UnknownIdentifier => "E101",
            ErrorCode::DimensionMismatch => "E102",
            ErrorCode::TypeError => "E103",
            ErrorCode::NotAProjector => "E104",
            ErrorCode::NonUnitary => "E105",
            ErrorCode::BadTimes => "E106",
            ErrorCode::MissingDynamics => "E107",
            ErrorCode::InconsistentFramework => "E108",
            ErrorCode::InvalidDecomposition => "E109",
            ErrorCode::SpaceDeclaration => "E110",
            ErrorCode::InvalidDensity => "E111",
            ErrorCode::InvalidData => "E112",
            ErrorCode::UnexpectedConsistency => "E113",
            ErrorCode::NumericDomain => "E114",
            ErrorCode::ZeroVector => "E115",
            ErrorCode::NonCommuting => "E116",
            ErrorCode::ArgumentCount => "E117",
        }
    }

    pub fn is_syntax(&self) -> bool {
        self.as_str().starts_with("E0")
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Diagnostic with a code and a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code} at {line}:{column}: {message}", line = span.line, column = span.column)]
pub struct ScenarioError {
    pub code: ErrorCode,
    pub message: String,
    pub span: Span,
}

impl ScenarioError {
    pub fn new(code: ErrorCode, span: Span, message: impl Into<String>) -> Self {
        ScenarioError { code, message: message.into(), span }
    }

    pub fn line(&self) -> usize {
        self.span.line
    }
}

pub type Result<T> = std::result::Result<T, ScenarioError>;
