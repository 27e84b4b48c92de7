import pytest

from figforge.errors import BackendRefusal, FigureRejected, InsufficientPanels, UnparseableReply
from figforge.figures import CompoundFigureRecord, PanelBox, derive_spatial_relation
from figforge.forge import (
    ContextBundle,
    KnowledgeNote,
    stage1_summarize,
    stage2_complement,
    stage3_describe_panels,
    stage4_generate,
    stage5_refine,
)
from figforge.forge.leakage import content_ngrams, hard_redact, shared_ngrams
from figforge.forge.records import validate_record
from figforge.gateway import FakeClock, Gateway, MockBackend, ModelEndpointConfig, ReplyCache

from helpers import png_bytes


def endpoint(role):
    return ModelEndpointConfig(endpoint_id=f"mock-{role}", base_url="mock://",
                               model_name=f"mock-{role}", requests_per_minute=10**6)


CHAT = endpoint("chat")
VISION = endpoint("vision")


def make_gateway(tmp_path, fixtures=None):
    return Gateway(ReplyCache(tmp_path / "cache"), MockBackend(fixtures=fixtures), clock=FakeClock())


def four_panel_figure():
    panels = [
        PanelBox("A", 0, 0, 80, 80, label="A"),
        PanelBox("B", 120, 0, 80, 80, label="B"),
        PanelBox("C", 0, 120, 80, 80, label="C"),
        PanelBox("D", 120, 120, 80, 80, label="D"),
    ]
    return CompoundFigureRecord(
        "F1", 200, 200, panels,
        caption="(A) CT of the neck. (B) PET overlay. (C) Histology. (D) Follow-up CT.",
        sub_captions={"A": "CT of the neck", "B": "PET overlay", "C": "Histology", "D": "Follow-up CT"},
    )


def bundle_for(figure, descriptions=None):
    descriptions = descriptions or {p.panel_id: f"a {p.panel_id} panel view" for p in figure.panels}
    return ContextBundle(
        figure_id=figure.figure_id,
        inline_summary="The case involved an insulinoma resected after imaging.",
        knowledge_notes=[KnowledgeNote("insulinoma", "a neuroendocrine tumor of the pancreas")],
        panel_descriptions=descriptions,
        caption=figure.caption,
    )


CROPS = [png_bytes(80, 80, [(0, 0, 80, 80)]) for _ in range(4)]


# -- stage 1 ---------------------------------------------------------------------

def test_stage1_deterministic(tmp_path):
    gw = make_gateway(tmp_path)
    a = stage1_summarize("Patient had an insulinoma. More text.", "A caption.", gw, CHAT)
    b = stage1_summarize("Patient had an insulinoma. More text.", "A caption.", gw, CHAT)
    assert a.summary == b.summary
    assert not a.caption_only
    assert len(a.digests) == 1


def test_stage1_empty_inline_flags_caption_only(tmp_path):
    gw = make_gateway(tmp_path)
    result = stage1_summarize("", "The caption describes the lesion.", gw, CHAT)
    assert result.caption_only
    assert result.summary


def test_stage1_summary_echoes_diagnosis_keyword(tmp_path):
    gw = make_gateway(tmp_path)
    inline = ("The patient presented with recurrent hypoglycemia caused by an insulinoma "
              "in the pancreatic neck. Surgical enucleation was curative. " + "Filler. " * 40)
    result = stage1_summarize(inline, "A compound figure caption.", gw, CHAT)
    assert result.summary
    assert len(result.summary) < len(inline)
    assert "insulinoma" in result.summary


# -- stage 2 ---------------------------------------------------------------------

def test_stage2_parses_blocks(tmp_path):
    reply = (
        "CONCEPT: MRI\nEXPLANATION: magnetic resonance imaging.\n"
        "CONCEPT: Biopsy\nEXPLANATION: tissue sampling.\n"
        "CONCEPT: Insulinoma\nEXPLANATION: a tumor.\n"
    )
    gw = make_gateway(tmp_path, fixtures={"KNOWLEDGE_NOTES": reply})
    result = stage2_complement("caption", "summary", gw, CHAT)
    assert [n.concept for n in result.notes] == ["MRI", "Biopsy", "Insulinoma"]


def test_stage2_dedups_case_insensitive(tmp_path):
    reply = (
        "CONCEPT: MRI\nEXPLANATION: one.\n"
        "CONCEPT: mri\nEXPLANATION: two.\n"
    )
    gw = make_gateway(tmp_path, fixtures={"KNOWLEDGE_NOTES": reply})
    result = stage2_complement("caption", "summary", gw, CHAT)
    assert len(result.notes) == 1
    assert result.notes[0].explanation == "one."


def test_stage2_malformed_retried_then_fails(tmp_path):
    gw = make_gateway(tmp_path, fixtures={"KNOWLEDGE_NOTES": "no blocks at all"})
    with pytest.raises(UnparseableReply):
        stage2_complement("caption", "summary", gw, CHAT)
    assert gw.stats.get("mock-chat", "calls") == 2


def test_stage2_repair_retry_succeeds(tmp_path):
    def flaky(call, sections, digest):
        if "REPAIR" in sections:
            return "CONCEPT: CT\nEXPLANATION: computed tomography."
        return "garbage"

    gw = make_gateway(tmp_path, fixtures={"KNOWLEDGE_NOTES": flaky})
    result = stage2_complement("caption", "summary", gw, CHAT)
    assert len(result.notes) == 1
    assert len(result.digests) == 2


# -- stage 3 ---------------------------------------------------------------------

def test_stage3_covers_all_panels(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    result = stage3_describe_panels(figure, CROPS, "summary", gw, VISION)
    assert sorted(result.descriptions) == ["A", "B", "C", "D"]
    assert result.failed_panels == []
    assert "PET overlay" in result.descriptions["B"]


def test_stage3_one_failure_tolerated(tmp_path):
    def flaky(call, sections, digest):
        if sections.get("PANEL LABEL") == "B":
            raise BackendRefusal("panel vision refused", 400)
        return f"desc of {sections.get('PANEL LABEL')}"

    gw = make_gateway(tmp_path, fixtures={"PANEL_DESCRIPTION": flaky})
    result = stage3_describe_panels(four_panel_figure(), CROPS, "summary", gw, VISION)
    assert sorted(result.descriptions) == ["A", "C", "D"]
    assert result.failed_panels == ["B"]


def test_stage3_half_failures_reject_figure(tmp_path):
    def flaky(call, sections, digest):
        if sections.get("PANEL LABEL") in ("B", "C"):
            raise BackendRefusal("refused", 400)
        return "fine"

    gw = make_gateway(tmp_path, fixtures={"PANEL_DESCRIPTION": flaky})
    with pytest.raises(FigureRejected):
        stage3_describe_panels(four_panel_figure(), CROPS, "summary", gw, VISION)


# -- stage 4 ---------------------------------------------------------------------

def test_stage4_spatial_is_template_deterministic(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    bundle = bundle_for(figure)
    record = stage4_generate("multi_image_spatial", bundle, figure, gw, CHAT, seed=7)
    # no model call happened
    assert gw.stats.get("mock-chat", "calls") == 0
    a_id, b_id = record.provenance.panel_ids
    a = figure.panel(a_id)
    b = figure.panel(b_id)
    relation = derive_spatial_relation(a, b, figure.image_width, figure.image_height, 0.05)
    desc_a = bundle.panel_descriptions[a_id]
    desc_b = bundle.panel_descriptions[b_id]
    from figforge.figures import relation_phrase
    assert record.answer == f"{desc_a} is {relation_phrase(relation)} {desc_b}."
    assert record.question.startswith("What is the spatial relationship between")
    assert len(record.images) == 2


def test_stage4_spatial_left_of_answer_text(tmp_path):
    gw = make_gateway(tmp_path)
    panels = [PanelBox("A", 0, 0, 80, 80), PanelBox("B", 320, 0, 80, 80)]
    figure = CompoundFigureRecord("F2", 400, 80, panels, caption="two panels")
    bundle = bundle_for(figure, {"A": "the CT image", "B": "the PET image"})
    for seed in range(6):
        record = stage4_generate("multi_image_spatial", bundle, figure, gw, CHAT, seed=seed)
        assert record.answer in (
            "the CT image is to the left of the PET image.",
            "the PET image is to the right of the CT image.",
        )


def test_stage4_spatial_single_panel_insufficient(tmp_path):
    gw = make_gateway(tmp_path)
    panels = [PanelBox("A", 0, 0, 80, 80)]
    figure = CompoundFigureRecord("F3", 100, 100, panels, caption="one panel")
    bundle = bundle_for(figure, {"A": "only panel"})
    with pytest.raises(InsufficientPanels):
        stage4_generate("multi_image_spatial", bundle, figure, gw, CHAT, seed=1)


def test_stage4_multi_choice_has_exactly_four_options(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    record = stage4_generate("multi_choice", bundle_for(figure), figure, gw, CHAT, seed=3)
    assert record.options is not None and len(record.options) == 4
    assert record.correct_option in ("A", "B", "C", "D")
    assert record.options[ord(record.correct_option) - ord("A")] == record.answer
    assert sum(1 for o in record.options if o == record.answer) == 1
    assert validate_record(record.to_json()) == []


def test_stage4_option_order_seed_dependent(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    bundle = bundle_for(figure)
    orders = {
        tuple(stage4_generate("multi_choice", bundle, figure, gw, CHAT, seed=s).options)
        for s in range(8)
    }
    assert len(orders) > 1


def test_stage4_records_validate(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    bundle = bundle_for(figure)
    for task_type in ("multi_image_multi_subimage", "multi_image_single_subimage",
                      "single_image", "text_only"):
        record = stage4_generate(task_type, bundle, figure, gw, CHAT, seed=11)
        assert validate_record(record.to_json()) == [], task_type
        assert record.task_type == task_type


def test_stage4_text_only_has_no_images(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    record = stage4_generate("text_only", bundle_for(figure), figure, gw, CHAT, seed=2)
    assert record.images == []


# -- leakage + stage 5 ---------------------------------------------------------------

def test_shared_ngrams_detects_verbatim_overlap():
    context = "The lesion was found in the pancreatic neck region on CT."
    answer = "found in the pancreatic neck"
    assert shared_ngrams(context, answer)


def test_content_ngrams_casefold_and_punctuation():
    assert content_ngrams("Alpha, BETA gamma; delta!") == content_ngrams("alpha beta gamma delta")


def test_hard_redact_removes_leaky_sentences():
    context = ("Imaging was performed. The mass sits in the pancreatic neck region. "
               "Surgery followed.")
    answer = "mass sits in the pancreatic neck"
    redacted = hard_redact(context, answer)
    assert shared_ngrams(redacted, answer) == []
    assert "Imaging was performed." in redacted
    assert "Surgery followed." in redacted


def test_hard_redact_handles_cross_sentence_ngrams():
    context = "They located the lesion. In the neck it sat."
    answer = "lesion in the neck"
    redacted = hard_redact(context, answer)
    assert shared_ngrams(redacted, answer) == []


def test_stage5_exempt_types_unchanged(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    bundle = bundle_for(figure)
    for task_type in ("multi_image_spatial", "multi_choice"):
        record = stage4_generate(task_type, bundle, figure, gw, CHAT, seed=5)
        refined, report = stage5_refine(record, gw, CHAT)
        assert refined == record
        assert report.iterations_used == 0
        assert not report.hard_redacted


def test_stage5_no_overlap_is_noop(tmp_path):
    gw = make_gateway(tmp_path)
    figure = four_panel_figure()
    record = stage4_generate("text_only", bundle_for(figure), figure, gw, CHAT, seed=2)
    clean = record.with_context("Completely unrelated background words here.", refined=False)
    refined, report = stage5_refine(clean, gw, CHAT)
    assert refined.context == clean.context
    assert report.iterations_used == 0
    assert not refined.provenance.refined


def test_stage5_hard_redacts_when_model_echoes(tmp_path):
    gw = make_gateway(tmp_path)  # default REFINE_CONTEXT handler echoes
    figure = four_panel_figure()
    record = stage4_generate("text_only", bundle_for(figure), figure, gw, CHAT, seed=2)
    leaky = record.with_context(f"Background sentence. {record.answer} Trailing sentence.",
                                refined=False)
    refined, report = stage5_refine(leaky, gw, CHAT)
    assert shared_ngrams(refined.context, refined.answer) == []
    assert report.iterations_used == 3
    assert report.hard_redacted
    assert refined.provenance.refined


def test_stage5_model_rewrite_exits_loop(tmp_path):
    def cooperative(call, sections, digest):
        return "A fully rewritten neutral background."

    gw = make_gateway(tmp_path, fixtures={"REFINE_CONTEXT": cooperative})
    figure = four_panel_figure()
    record = stage4_generate("text_only", bundle_for(figure), figure, gw, CHAT, seed=2)
    leaky = record.with_context(f"Benign filler. {record.answer}", refined=False)
    refined, report = stage5_refine(leaky, gw, CHAT)
    assert report.iterations_used == 1
    assert not report.hard_redacted
    assert refined.context == "A fully rewritten neutral background."
