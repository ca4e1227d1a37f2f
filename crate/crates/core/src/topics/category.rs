use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analyst-assigned topic categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Disease
    D,
    /// Health policy and healthcare
    H,
    /// Homophobia
    O,
    /// Politics
    P,
    /// Racism
    R,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::D,
        Category::H,
        Category::O,
        Category::P,
        Category::R,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Category::D => "D",
            Category::H => "H",
            Category::O => "O",
            Category::P => "P",
            Category::R => "R",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Category::D => "Disease",
            Category::H => "Health Policy and Healthcare",
            Category::O => "Homophobia",
            Category::P => "Politics",
            Category::R => "Racism",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Category {
    type Err = Error;

    /// Accepts the one-letter codes; `F` is read as `H`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D" => Ok(Category::D),
            "H" | "F" => Ok(Category::H),
            "O" => Ok(Category::O),
            "P" => Ok(Category::P),
            "R" => Ok(Category::R),
            other => Err(Error::config(format!("unknown category code `{other}`"))),
        }
    }
}

/// Topic id to category, as read from a `{"0": "D", "1": "H", ...}` file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryMap {
    pub topic_to_category: BTreeMap<usize, Category>,
}

impl CategoryMap {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, String> = serde_json::from_str(text).map_err(|e| {
            Error::config(format!("category map is not a JSON object of strings: {e}"))
        })?;
        let mut topic_to_category = BTreeMap::new();
        for (k, v) in raw {
            let topic: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("category map key `{k}` is not a topic id")))?;
            topic_to_category.insert(topic, v.parse()?);
        }
        Ok(CategoryMap { topic_to_category })
    }

    pub fn uniform(k: usize, category: Category) -> Self {
        CategoryMap {
            topic_to_category: (0..k).map(|t| (t, category)).collect(),
        }
    }

    pub fn get(&self, topic: usize) -> Option<Category> {
        self.topic_to_category.get(&topic).copied()
    }

    /// Errors on the first topic in `0..k` without a category.
    pub fn ensure_covers(&self, k: usize) -> Result<()> {
        match (0..k).find(|t| !self.topic_to_category.contains_key(t)) {
            Some(t) => Err(Error::config(format!(
                "category map has no entry for topic {t}"
            ))),
            None => Ok(()),
        }
    }
}

/// Category per record, inherited from its topic. Records outside every topic stay `None`.
pub fn apply_categories(
    assignments: &[Option<usize>],
    map: &CategoryMap,
) -> Result<Vec<Option<Category>>> {
    assignments
        .iter()
        .map(|a| match a {
            None => Ok(None),
            Some(t) => map
                .get(*t)
                .map(Some)
                .ok_or_else(|| Error::config(format!("category map has no entry for topic {t}"))),
        })
        .collect()
}
