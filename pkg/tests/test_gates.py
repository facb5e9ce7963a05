import json
import random

import pytest

from regmap.gates import (
    ContractViolation,
    PredictorMention,
    apply_sector_match_filter,
    parse_predictor_validation,
    parse_predictors,
    parse_rdc,
    parse_relevance,
    parse_sector,
)
from regmap.ingest import SourceRecord
from regmap.vocab import SECTOR_LABELS, SECTORS


def make_record(doi, sector="healthcare_pharma", abstract="A decision tree study."):
    return SourceRecord(
        doi=doi, title="t", abstract=abstract, venue="v", keywords=(),
        year=2020, registry="crossref", searched_sector=sector,
    )


class TestRelevance:
    def test_exact_tokens(self):
        assert parse_relevance("Relevant") == "Relevant"
        assert parse_relevance("Not relevant") == "Not relevant"

    def test_trailing_whitespace_trimmed(self):
        assert parse_relevance("Relevant\n") == "Relevant"

    @pytest.mark.parametrize("raw", ["relevant.", "RELEVANT", "Relevant!", "Maybe",
                                     "Not Relevant", "Relevant or not", ""])
    def test_deviations_rejected(self, raw):
        with pytest.raises(ContractViolation):
            parse_relevance(raw)

    def test_fuzz_never_coerces(self):
        rng = random.Random(7)
        mutations = [lambda s: s + ".", lambda s: s.upper(), lambda s: s.lower(),
                     lambda s: "the answer is " + s, lambda s: s[:-1],
                     lambda s: s.replace("e", "3")]
        for _ in range(2000):
            raw = rng.choice(mutations)(rng.choice(["Relevant", "Not relevant"]))
            if raw.strip() in ("Relevant", "Not relevant"):
                continue
            with pytest.raises(ContractViolation):
                parse_relevance(raw)


class TestSector:
    @pytest.mark.parametrize("token", SECTOR_LABELS)
    def test_vocabulary_accepted(self, token):
        assert parse_sector(token, doi="d").assigned == token

    def test_observed_out_of_list_label_quarantined(self):
        # 'manufacturing_industry' appears in released outputs but is not a
        # Step-2 token.
        with pytest.raises(ContractViolation):
            parse_sector("manufacturing_industry")

    def test_match_filter(self):
        corpus = [make_record("10.1/a", "insurance"), make_record("10.1/b", "insurance"),
                  make_record("10.1/c", "social_media")]
        labels = [parse_sector("insurance", doi="10.1/a"),
                  parse_sector("social_media", doi="10.1/b"),
                  parse_sector("none_of_the_above", doi="10.1/c")]
        included, counts = apply_sector_match_filter(labels, corpus)
        assert [r.doi for r in included] == ["10.1/a"]
        assert counts == {"insurance": 1}

    def test_none_of_the_above_never_matches(self):
        # The sentinel is not a query sector, so it can never equal
        # searched_sector.
        assert "none_of_the_above" not in SECTORS

    def test_known_match_fraction(self):
        corpus = [make_record(f"10.1/{i}", "insurance") for i in range(100)]
        labels = [parse_sector("insurance" if i % 2 == 0 else "social_media", doi=f"10.1/{i}")
                  for i in range(100)]
        included, _ = apply_sector_match_filter(labels, corpus)
        assert len(included) == 50


class TestPredictors:
    ABSTRACT = ("We trained a decision tree to predict readmission using age, "
                "prior admissions, and length of stay. Accuracy was high.")

    def payload(self, items):
        return json.dumps({"predictors": items})

    def test_accepted_mention(self):
        raw = self.payload([{"name": "Age", "evidence":
                             "We trained a decision tree to predict readmission using age, "
                             "prior admissions, and length of stay."}])
        mentions = parse_predictors(raw, self.ABSTRACT, doi="d")
        assert mentions == [PredictorMention(
            doi="d", name="Age",
            evidence="We trained a decision tree to predict readmission using age, "
                     "prior admissions, and length of stay.")]

    def test_empty_list_valid(self):
        assert parse_predictors(self.payload([]), self.ABSTRACT) == []

    def test_evidence_not_in_abstract_dropped(self):
        raw = self.payload([{"name": "age", "evidence": "A sentence that is not there."}])
        assert parse_predictors(raw, self.ABSTRACT) == []

    def test_name_not_in_evidence_dropped(self):
        raw = self.payload([{"name": "blood pressure", "evidence":
                             "Accuracy was high."}])
        assert parse_predictors(raw, self.ABSTRACT) == []

    def test_duplicate_names_collapse_case_insensitively(self):
        ev = "We trained a decision tree to predict readmission using age, " \
             "prior admissions, and length of stay."
        raw = self.payload([{"name": "Age", "evidence": ev}, {"name": "AGE", "evidence": ev}])
        mentions = parse_predictors(raw, self.ABSTRACT)
        assert len(mentions) == 1 and mentions[0].name == "Age"

    @pytest.mark.parametrize("raw", [
        "not json",
        json.dumps({"predictors": [], "extra": 1}),
        json.dumps({"features": []}),
        json.dumps({"predictors": [{"name": "age"}]}),
        json.dumps({"predictors": [{"name": "age", "evidence": "x", "score": 1}]}),
    ])
    def test_strict_schema(self, raw):
        with pytest.raises(ContractViolation):
            parse_predictors(raw, self.ABSTRACT)


class TestPredictorValidation:
    def test_tokens(self):
        assert parse_predictor_validation("Valid") == "Valid"
        assert parse_predictor_validation("Not valid\n") == "Not valid"

    @pytest.mark.parametrize("raw", ['"Valid"', "valid", "Not Valid", "Valid.", ""])
    def test_deviations(self, raw):
        with pytest.raises(ContractViolation):
            parse_predictor_validation(raw)


class TestRdc:
    def test_examples(self):
        raw = json.dumps({"class": "Device_OnlineID",
                          "rationale": "Network identifier used for online tracking"})
        assert parse_rdc(raw) == ("Device_OnlineID",
                                  "Network identifier used for online tracking")
        raw = json.dumps({"class": "Health_Clinical",
                          "rationale": "Clinical vital sign measurement"})
        assert parse_rdc(raw)[0] == "Health_Clinical"

    def test_rationale_word_cap(self):
        raw = json.dumps({"class": "Other",
                          "rationale": " ".join(["w"] * 16)})
        with pytest.raises(ContractViolation):
            parse_rdc(raw)
        raw = json.dumps({"class": "Other", "rationale": " ".join(["w"] * 15)})
        assert parse_rdc(raw)[0] == "Other"

    def test_out_of_vocabulary_class(self):
        with pytest.raises(ContractViolation):
            parse_rdc(json.dumps({"class": "Genetic", "rationale": "x"}))

    def test_extra_keys_rejected(self):
        with pytest.raises(ContractViolation):
            parse_rdc(json.dumps({"class": "Other", "rationale": "x", "note": "y"}))
