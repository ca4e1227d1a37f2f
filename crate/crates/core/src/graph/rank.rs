use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CentralityTable, CommunityPartition};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::report::csv_reader;

/// Individuals with strictly more followers than this count as high-impact.
pub const HIGH_IMPACT_FOLLOWERS: u64 = 50_000;

/// Account types assigned by hand; they take precedence over follower counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManualType {
    OrgMedia,
    OrgGovernment,
    IndPolitician,
    IndJournalist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountType {
    OrgMedia,
    OrgGovernment,
    IndPolitician,
    IndJournalist,
    IndImpact,
    IndOther,
}

impl AccountType {
    pub fn as_str(self) -> &'static str {
        match self {
            AccountType::OrgMedia => "org_media",
            AccountType::OrgGovernment => "org_government",
            AccountType::IndPolitician => "ind_politician",
            AccountType::IndJournalist => "ind_journalist",
            AccountType::IndImpact => "ind_impact",
            AccountType::IndOther => "ind_other",
        }
    }
}

impl fmt::Display for AccountType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<ManualType> for AccountType {
    fn from(m: ManualType) -> Self {
        match m {
            ManualType::OrgMedia => AccountType::OrgMedia,
            ManualType::OrgGovernment => AccountType::OrgGovernment,
            ManualType::IndPolitician => AccountType::IndPolitician,
            ManualType::IndJournalist => AccountType::IndJournalist,
        }
    }
}

impl FromStr for ManualType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "org_media" => Ok(ManualType::OrgMedia),
            "org_government" => Ok(ManualType::OrgGovernment),
            "ind_politician" => Ok(ManualType::IndPolitician),
            "ind_journalist" => Ok(ManualType::IndJournalist),
            other => Err(Error::input(format!("unknown account type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserProfile {
    pub username: String,
    pub verified: bool,
    pub followers: u64,
    pub manual_type: Option<ManualType>,
}

pub fn classify_account(profile: &UserProfile) -> AccountType {
    match profile.manual_type {
        Some(m) => m.into(),
        None if profile.followers > HIGH_IMPACT_FOLLOWERS => AccountType::IndImpact,
        None => AccountType::IndOther,
    }
}

/// Profiles from the `verified`/`followers` fields carried by records; the latest record
/// of each author wins.
pub fn profiles_from_corpus(corpus: &Corpus) -> HashMap<String, UserProfile> {
    let mut profiles: HashMap<String, UserProfile> = HashMap::new();
    for r in corpus {
        if r.verified.is_none() && r.followers.is_none() {
            continue;
        }
        let p = profiles
            .entry(r.author.clone())
            .or_insert_with(|| UserProfile {
                username: r.author.clone(),
                ..Default::default()
            });
        if let Some(v) = r.verified {
            p.verified = v;
        }
        if let Some(f) = r.followers {
            p.followers = f;
        }
    }
    profiles
}

/// Reads `username,verified,followers,manual_type`; `manual_type` may be blank.
pub fn read_profiles_csv<R: Read>(input: R) -> Result<HashMap<String, UserProfile>> {
    #[derive(Deserialize)]
    struct Row {
        username: String,
        verified: bool,
        followers: u64,
        #[serde(default)]
        manual_type: Option<String>,
    }
    let mut out = HashMap::new();
    for row in csv_reader(input).deserialize::<Row>() {
        let row = row?;
        let username = row.username.trim_start_matches('@').to_string();
        let manual_type = match row.manual_type.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(s.parse()?),
        };
        out.insert(
            username.clone(),
            UserProfile {
                username,
                verified: row.verified,
                followers: row.followers,
                manual_type,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMetric {
    InDegree,
    Betweenness,
}

impl FromStr for RankMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in_degree" | "in-degree" | "indegree" => Ok(RankMetric::InDegree),
            "betweenness" => Ok(RankMetric::Betweenness),
            other => Err(Error::input(format!("unknown ranking metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedUser {
    pub username: String,
    pub value: f64,
    pub cluster: Option<String>,
    pub verified: bool,
    pub account_type: AccountType,
}

/// Top `k` vertices by `metric`, ties broken by username, joined with community labels
/// and account types. Vertices without a profile rank as unverified with zero followers.
pub fn rank_users(
    table: &CentralityTable,
    metric: RankMetric,
    k: usize,
    partition: Option<&CommunityPartition>,
    profiles: &HashMap<String, UserProfile>,
) -> Vec<RankedUser> {
    let value = |v: usize| match metric {
        RankMetric::InDegree => table.in_degree[v] as f64,
        RankMetric::Betweenness => table.betweenness[v],
    };
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| {
        value(b)
            .total_cmp(&value(a))
            .then_with(|| table.vertices[a].cmp(&table.vertices[b]))
    });
    order
        .into_iter()
        .take(k)
        .map(|v| {
            let username = table.vertices[v].clone();
            let fallback = UserProfile {
                username: username.clone(),
                ..Default::default()
            };
            let profile = profiles.get(&username).unwrap_or(&fallback);
            RankedUser {
                cluster: partition.map(|p| p.label_of(v).to_string()),
                verified: profile.verified,
                account_type: classify_account(profile),
                value: value(v),
                username,
            }
        })
        .collect()
}
