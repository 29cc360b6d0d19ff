import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regcheck.errors import ProviderUnavailable, TargetStudyNotFound, ValidationError
from regcheck.preprocess import (
    RESOLVED_SECTION_HEADING,
    StudySelector,
    filter_to_study,
    find_back_reference_sentences,
    normalize_layout,
    resolve_cross_study_references,
    strip_references,
)

from conftest import ScriptedJudgeProvider, doc_from_sections


class TestStripReferences:
    def test_reference_section_removed(self):
        doc = doc_from_sections(
            [("Intro", "Opening text."), ("Methods", "Method text."), ("References", "Smith 2020.")]
        )
        stripped = strip_references(doc)
        assert [s.heading for s in stripped.sections] == ["Intro", "Methods"]

    def test_no_reference_section_is_identity_on_headings(self):
        doc = doc_from_sections([("Intro", "Opening text."), ("Methods", "Method text.")])
        assert [s.heading for s in strip_references(doc).sections] == ["Intro", "Methods"]

    @pytest.mark.parametrize(
        "heading", ["References", "REFERENCES", "Bibliography", "Works Cited", "reference list", "5. References"]
    )
    def test_heading_variants_matched(self, heading):
        doc = doc_from_sections([("Intro", "Text here."), (heading, "Entry one.")])
        assert [s.heading for s in strip_references(doc).sections] == ["Intro"]

    def test_unheaded_continuations_removed(self):
        doc = doc_from_sections(
            [
                ("Intro", "Text."),
                ("References", "Smith, A. (2019)."),
                ("", "Jones, B. (2020)."),
                ("Appendix A", "Extra materials."),
            ]
        )
        stripped = strip_references(doc)
        assert [s.heading for s in stripped.sections] == ["Intro", "Appendix A"]

    def test_dehyphenation(self):
        doc = doc_from_sections([("Intro", "This concerns pre-\nregistration of studies.")])
        assert "preregistration" in strip_references(doc).sections[0].body

    def test_whitespace_collapsed_paragraphs_preserved(self):
        doc = doc_from_sections([("Intro", "Spaced   out\ttext\nhere.\n\nSecond    paragraph.")])
        body = strip_references(doc).sections[0].body
        assert body == "Spaced out text here.\n\nSecond paragraph."

    def test_idempotent(self):
        doc = doc_from_sections(
            [("Intro", "Some pre-\nprint text   with  spaces.\n\nMore."), ("References", "X 2020.")]
        )
        once = strip_references(doc)
        twice = strip_references(once)
        assert once == twice

    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["Intro", "Methods", "References", "Results", "bibliography", ""]),
                st.text(alphabet="abc -\n.", min_size=1, max_size=40),
            ),
            max_size=8,
        )
    )
    @settings(max_examples=60)
    def test_idempotence_property(self, raw_sections):
        sections = [(h, b) for h, b in raw_sections if b.strip()]
        doc = doc_from_sections(sections)
        once = strip_references(doc)
        assert strip_references(once) == once


class TestNormalizeLayout:
    def test_dehyphenate_across_linebreak(self):
        assert normalize_layout("word-\nword") == "wordword"

    def test_numeric_hyphen_ranges_untouched(self):
        assert normalize_layout("pages 3-\n5 stay split?") == "pages 3- 5 stay split?"

    def test_paragraph_breaks_survive(self):
        assert normalize_layout("a b\n\nc d") == "a b\n\nc d"


FIXTURE_SECTIONS = [
    ("Introduction", "General opening about attention."),
    ("Study 1", "First study with its own method and results."),
    ("Study 2", "Second study replicating with a stricter design."),
    ("General Discussion", "What both studies mean together."),
]


class TestFilterToStudy:
    def test_single_study_identity(self):
        doc = doc_from_sections(FIXTURE_SECTIONS)
        selector = StudySelector(multi_study=False)
        assert filter_to_study(doc, selector) == doc

    def test_retains_intro_target_discussion(self):
        doc = doc_from_sections(FIXTURE_SECTIONS)
        filtered = filter_to_study(doc, StudySelector(multi_study=True, target_label="Study 2"))
        assert [s.heading for s in filtered.sections] == ["Introduction", "Study 2", "General Discussion"]

    def test_unknown_target_raises(self):
        doc = doc_from_sections(FIXTURE_SECTIONS)
        with pytest.raises(TargetStudyNotFound):
            filter_to_study(doc, StudySelector(multi_study=True, target_label="Study 5"))

    def test_target_block_spans_until_next_study(self):
        doc = doc_from_sections(
            [
                ("Introduction", "Opening."),
                ("Study 1", "Study one text."),
                ("Method", "Method of study one."),
                ("Study 2", "Study two text."),
                ("General Discussion", "Wrap up."),
            ]
        )
        filtered = filter_to_study(doc, StudySelector(multi_study=True, target_label="Study 1"))
        assert [s.heading for s in filtered.sections] == [
            "Introduction",
            "Study 1",
            "Method",
            "General Discussion",
        ]

    def test_experiment_headings_supported(self):
        doc = doc_from_sections(
            [
                ("Introduction", "Opening."),
                ("Experiment 1", "First experiment."),
                ("Experiment 2", "Second experiment."),
                ("Discussion", "Joint discussion."),
            ]
        )
        filtered = filter_to_study(doc, StudySelector(multi_study=True, target_label="Experiment 2"))
        assert [s.heading for s in filtered.sections] == ["Introduction", "Experiment 2", "Discussion"]

    def test_appendix_retained(self):
        doc = doc_from_sections(
            [
                ("Introduction", "Opening."),
                ("Study 1", "One."),
                ("Study 2", "Two."),
                ("Appendix A", "Materials."),
            ]
        )
        filtered = filter_to_study(doc, StudySelector(multi_study=True, target_label="Study 1"))
        assert [s.heading for s in filtered.sections] == ["Introduction", "Study 1", "Appendix A"]

    def test_no_new_text_invented(self):
        doc = doc_from_sections(FIXTURE_SECTIONS)
        filtered = filter_to_study(doc, StudySelector(multi_study=True, target_label="Study 2"))
        original = {(s.heading, s.body) for s in doc.sections}
        assert all((s.heading, s.body) in original for s in filtered.sections)

    def test_selector_validation(self):
        with pytest.raises(ValidationError):
            StudySelector(multi_study=True, target_label=None)
        with pytest.raises(ValidationError):
            StudySelector(multi_study=True, target_label="  ")

    def test_study_design_heading_not_mistaken_for_study_block(self):
        doc = doc_from_sections(
            [
                ("Study Design", "Design overview text."),
                ("Study 1", "First."),
                ("Study 2", "Second."),
            ]
        )
        filtered = filter_to_study(doc, StudySelector(multi_study=True, target_label="Study 2"))
        assert [s.heading for s in filtered.sections] == ["Study Design", "Study 2"]


MULTI = [
    ("Introduction", "Opening remarks without any trigger."),
    ("Experiment 1", "Participants completed a dot-probe task with masked cues for twelve minutes."),
    ("Experiment 2", "Our procedure was the same as in Experiment 1. New participants were recruited."),
    ("General Discussion", "Joint summary."),
]


def cross_study_payload(quotes):
    return json.dumps({"quotes": quotes})


class TestResolveCrossStudyReferences:
    def filtered_and_full(self):
        full = doc_from_sections(MULTI)
        filtered = filter_to_study(full, StudySelector(multi_study=True, target_label="Experiment 2"))
        return filtered, full

    def test_trigger_detection(self):
        filtered, _ = self.filtered_and_full()
        triggers = find_back_reference_sentences(filtered)
        assert triggers == ["Our procedure was the same as in Experiment 1."]

    def test_no_triggers_returns_unchanged(self):
        doc = doc_from_sections([("Intro", "Nothing referring back."), ("Experiment 2", "Fresh methods.")])
        provider = ScriptedJudgeProvider([])
        assert resolve_cross_study_references(doc, doc, provider) == doc

    def test_verified_quote_appended(self):
        filtered, full = self.filtered_and_full()
        quote = "a dot-probe task with masked cues"
        provider = ScriptedJudgeProvider([cross_study_payload([{"quote": quote, "study_label": "Experiment 1"}])])
        resolved = resolve_cross_study_references(filtered, full, provider)
        synthetic = resolved.sections[-1]
        assert synthetic.heading == RESOLVED_SECTION_HEADING
        assert quote in synthetic.body
        assert "Experiment 1" in synthetic.body

    def test_unverifiable_quote_discarded(self):
        filtered, full = self.filtered_and_full()
        provider = ScriptedJudgeProvider(
            [cross_study_payload([{"quote": "text that appears nowhere in the paper", "study_label": "Experiment 1"}])]
        )
        resolved = resolve_cross_study_references(filtered, full, provider)
        assert all(s.heading != RESOLVED_SECTION_HEADING for s in resolved.sections)

    def test_provider_outage_skips_flow(self, caplog):
        filtered, full = self.filtered_and_full()
        provider = ScriptedJudgeProvider([ProviderUnavailable("down")])
        with caplog.at_level("WARNING"):
            resolved = resolve_cross_study_references(filtered, full, provider)
        assert resolved == filtered
        assert any("cross_study_skipped" in r.message for r in caplog.records)

    def test_every_appended_quote_is_substring_of_full(self):
        filtered, full = self.filtered_and_full()
        good = "masked cues"
        bad = "cues that were never masked"
        provider = ScriptedJudgeProvider(
            [
                cross_study_payload(
                    [
                        {"quote": good, "study_label": "Experiment 1"},
                        {"quote": bad, "study_label": "Experiment 1"},
                    ]
                )
            ]
        )
        resolved = resolve_cross_study_references(filtered, full, provider)
        synthetic = resolved.sections[-1]
        assert good in synthetic.body
        assert bad not in synthetic.body
        full_text = full.full_text()
        for line in synthetic.body.split("\n\n"):
            quoted = line.split('"')[1]
            assert quoted in full_text

    def test_prompt_carries_dropped_study_text(self):
        filtered, full = self.filtered_and_full()
        provider = ScriptedJudgeProvider([cross_study_payload([])])
        resolve_cross_study_references(filtered, full, provider)
        assert len(provider.bundles) == 1
        assert "dot-probe task" in provider.bundles[0].payload["dropped_text"]
        assert "same as in Experiment 1" in provider.bundles[0].payload["trigger_sentence"]
