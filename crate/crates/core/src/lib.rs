// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Consistent-histories reasoning for closed finite-dimensional quantum
//! systems: projector algebra, history weights, consistency checks,
//! framework-relative probabilities and a small scenario language.

pub mod corpus;
pub mod framework;
pub mod histories;
pub mod qalg;
pub mod reasoning;
pub mod scenario;
