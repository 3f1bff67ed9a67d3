//! Seeded synthetic corpora for tests, benchmarks and documentation.
//!
//! The records are English and mimic payroll help-desk traffic: numbered
//! guides, `Click on:` component markup and short factual sentences.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::MessageType;
use crate::corpus::{ContextDoc, Dataset, Language, Record};

const COMPONENTS: &[&str] = &[
    "Payroll Settings",
    "Tax Table",
    "Salary Overview",
    "Employee Card",
    "Payslip Archive",
    "Invoice Manager",
    "Leave Calendar",
    "Pension Module",
    "Expense Claims",
    "Bank Export",
    "Holiday Pay",
    "Travel Allowance",
];

const FABRICATED: &[&str] = &[
    "Profit Wizard",
    "Salary Booster",
    "Quick Tax Fixer",
    "Payslip Generator Pro",
    "Smart Ledger",
    "Auto Approve Panel",
];

const OBJECTS: &[&str] = &[
    "tax rates",
    "payslip",
    "salary",
    "invoice",
    "pension scheme",
    "leave balance",
    "bank details",
    "holiday allowance",
];

const ACTIONS: &[&str] = &["adjust", "change", "export", "approve", "create", "view"];

const FACTS: &[&str] = &[
    "The employee receives a payslip every month.",
    "The system calculates the salary after the period closes.",
    "The manager approves the invoice before payment.",
    "The administrator creates a report for the accountant.",
    "The application shows the payslip in the archive.",
    "The employer pays the employee on the last working day.",
    "Each user opens the menu from the start screen.",
    "The customer sends an invoice through the portal.",
];

const FILLER: &[&str] = &[
    "period", "amount", "gross", "net", "deduction", "contract", "hours", "wage", "month", "year", "code", "line",
    "total", "balance", "entry", "journal", "schedule", "status", "record", "field", "value", "form", "list", "page",
];

/// Product vocabulary of the synthetic corpora, for use as company terms.
pub fn company_terms() -> Vec<String> {
    let mut words: Vec<String> = COMPONENTS
        .iter()
        .flat_map(|c| c.split_whitespace())
        .map(str::to_lowercase)
        .collect();
    words.sort();
    words.dedup();
    words
}

fn guide(rng: &mut ChaCha8Rng, action: &str, object: &str) -> (Vec<&'static str>, String) {
    let mut comps: Vec<&'static str> = COMPONENTS.choose_multiple(rng, 2).copied().collect();
    comps.sort();
    let steps = [
        format!("Go to: {}", comps[0]),
        format!("Click on: {}", comps[1]),
        format!("Select the {object} you want to {action}"),
        format!("{} the {object} and press save", capitalize(action)),
    ];
    let n = rng.random_range(3..=4);
    let text = steps[..n]
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n");
    (comps, text)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn question(rng: &mut ChaCha8Rng, kind: MessageType, action: &str, object: &str) -> String {
    match kind {
        MessageType::Binary => format!("Is it possible to {action} the {object}?"),
        MessageType::Instruction => {
            if rng.random_bool(0.5) {
                format!("How do I {action} the {object}?")
            } else {
                format!("How can I {action} the {object} myself?")
            }
        }
        _ => unreachable!("only scorable types are generated here"),
    }
}

fn context_doc(id: String, action: &str, object: &str, guide_text: &str, facts: &[&str]) -> ContextDoc {
    let body = format!(
        "To {action} the {object}, follow these steps:\n{guide_text}\n\n{}\nBecause the {object} is part of the payroll, for example the monthly run depends on it.",
        facts.join(" ")
    );
    ContextDoc::new(id, capitalize(object), body)
}

/// A corpus with known truth. True answers reproduce a context guide or
/// quote the context and name only context components; untrue answers name
/// a component that the context never mentions. Every message is Binary or
/// Instruction. Returns the dataset and the truth flag per record.
pub fn planted_truth(n: usize, seed: u64) -> (Dataset, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let is_true = i % 2 == 0;
        let kind = if rng.random_bool(0.5) {
            MessageType::Binary
        } else {
            MessageType::Instruction
        };
        let action = *ACTIONS.choose(&mut rng).unwrap();
        let object = *OBJECTS.choose(&mut rng).unwrap();
        let (comps, guide_text) = guide(&mut rng, action, object);
        let facts: Vec<&str> = FACTS.choose_multiple(&mut rng, 3).copied().collect();
        let doc = context_doc(format!("doc-{i}"), action, object, &guide_text, &facts);

        let opener = if kind == MessageType::Binary {
            format!("Yes, it is possible to {action} the {object}.")
        } else {
            format!("You can {action} the {object} as follows.")
        };
        let answer = if is_true {
            if rng.random_bool(0.7) {
                format!("{opener}\n{guide_text}")
            } else {
                format!(
                    "{opener} Click on: {}. {} Because the {object} is part of the payroll, for example the monthly run depends on it.",
                    comps[1], facts[0]
                )
            }
        } else {
            let fake = *FABRICATED.choose(&mut rng).unwrap();
            if rng.random_bool(0.5) {
                format!("{opener}\n1. Go to: {fake}\n2. Click on: {}\n3. Press save", comps[0])
            } else {
                format!("{opener} Click on: {fake} and confirm.")
            }
        };
        let rating = if is_true {
            rng.random_range(4..=5)
        } else {
            rng.random_range(1..=2)
        };
        records.push(
            Record::new(format!("planted-{i:04}"), question(&mut rng, kind, action, object), answer)
                .with_context(doc)
                .with_rating(rating)
                .with_language(Language::English),
        );
        truth.push(is_true);
    }
    (
        Dataset {
            name: format!("planted-{seed}"),
            records,
        },
        truth,
    )
}

const OTHER_MESSAGES: &[(&str, MessageType)] = &[
    ("I get the error: mutation cannot be executed", MessageType::Error),
    ("Error 500 when I open the salary overview", MessageType::Error),
    ("I have adjusted tax settings, why don't I see a payslip anymore?", MessageType::Reasoning),
    ("Why is my payslip empty?", MessageType::Reasoning),
    ("write an email to notify customers of the new tax rates.", MessageType::Action),
    ("Good morning", MessageType::Unspecified),
    ("I just ate a sandwich", MessageType::Unspecified),
    ("What are the tax rates in the Netherlands?", MessageType::General),
    ("What products do you offer?", MessageType::General),
    ("Give me an explanation of the pension scheme?", MessageType::General),
];

/// A corpus mixing every message type. `type_label` carries the intended
/// type; the classifier decides what is actually scored.
pub fn mixed_types(n: usize, seed: u64) -> Dataset {
    let (planted, _) = planted_truth(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let records = planted
        .records
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            if i % 3 != 0 {
                let (msg, label) = *OTHER_MESSAGES.choose(&mut rng).unwrap();
                r.message = msg.to_string();
                r.type_label = Some(label);
            } else {
                r.type_label = Some(if r.message.starts_with("Is it possible") {
                    MessageType::Binary
                } else {
                    MessageType::Instruction
                });
            }
            r.id = format!("mixed-{i:04}");
            r
        })
        .collect();
    Dataset {
        name: format!("mixed-{seed}"),
        records,
    }
}

fn prose(rng: &mut ChaCha8Rng, tokens: usize) -> String {
    let mut words = Vec::with_capacity(tokens);
    while words.len() < tokens {
        if rng.random_bool(0.3) {
            let fact = *FACTS.choose(rng).unwrap();
            words.extend(fact.split_whitespace().map(str::to_string));
        } else {
            let len = rng.random_range(5..12);
            for j in 0..len {
                let w = *FILLER.choose(rng).unwrap();
                words.push(if j + 1 == len { format!("{w}.") } else { w.to_string() });
            }
        }
    }
    words.truncate(tokens);
    words.join(" ")
}

/// Large records for timing: answers of at most `answer_tokens` and
/// contexts of at most `context_tokens` whitespace tokens.
pub fn throughput(n: usize, answer_tokens: usize, context_tokens: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let action = *ACTIONS.choose(&mut rng).unwrap();
            let object = *OBJECTS.choose(&mut rng).unwrap();
            let kind = if i % 2 == 0 {
                MessageType::Binary
            } else {
                MessageType::Instruction
            };
            let (_, guide_text) = guide(&mut rng, action, object);
            let guide_len = guide_text.split_whitespace().count();
            let context = format!("{guide_text}\n{}", prose(&mut rng, context_tokens.saturating_sub(guide_len)));
            let answer = prose(&mut rng, answer_tokens);
            Record::new(format!("bulk-{i:05}"), question(&mut rng, kind, action, object), answer)
                .with_context(ContextDoc::new(format!("bulk-doc-{i}"), "", context))
                .with_language(Language::English)
        })
        .collect();
    Dataset {
        name: format!("throughput-{seed}"),
        records,
    }
}

/// Planted-truth records whose ratings follow `counts` (rating to number of
/// records). Ratings 1 and 2 get untrue answers, 4 and 5 true ones, 3 either.
pub fn rated(counts: &BTreeMap<u8, usize>, seed: u64) -> Dataset {
    let total: usize = counts.values().sum();
    let (pool, truth) = planted_truth(2 * total + 2, seed);
    let mut trues = pool.records.iter().zip(&truth).filter(|(_, t)| **t).map(|(r, _)| r);
    let mut falses = pool.records.iter().zip(&truth).filter(|(_, t)| !**t).map(|(r, _)| r);
    let mut records = Vec::with_capacity(total);
    for (&rating, &n) in counts {
        for k in 0..n {
            let src = match rating {
                0..=2 => falses.next(),
                3 if k % 2 == 0 => falses.next(),
                _ => trues.next(),
            };
            let mut r = src.expect("pool holds enough records").clone();
            r.human_rating = Some(rating);
            r.id = format!("rated-{:04}", records.len());
            records.push(r);
        }
    }
    Dataset {
        name: format!("rated-{seed}"),
        records,
    }
}
