"""Prompt templates for the five generation stages.

Every prompt opens with a ``TASK:`` marker line and lays content out in
upper-case sections; replies must follow the tagged skeleton named in the
instructions (``CONTEXT:`` / ``QUESTION:`` / ``ANSWER:`` and, for the
multi-choice task, ``DISTRACTOR:`` lines), which keeps parsing mechanical.
"""

SYSTEM_PROMPT = (
    "You prepare medical training data from compound figures and their "
    "article text. Follow the output skeleton in the instructions exactly."
)

STAGE1_SUMMARY = """TASK: INLINE_SUMMARY
INSTRUCTIONS:
Condense the inline text discussing a compound figure into a short, coherent
clinical narrative. Keep pathological findings, diagnostic workflow, and
treatment outcomes; drop citations and tangents. Reply with the narrative
only.
CAPTION:
{caption}
INLINE TEXT:
{inline_text}
"""

STAGE2_KNOWLEDGE = """TASK: KNOWLEDGE_NOTES
INSTRUCTIONS:
Identify the key medical concepts (symptoms, pathologies, diagnostic
procedures, treatments) needed to understand this case and explain each:
clinical significance, diagnostic criteria, imaging characteristics. Reply
with one block per concept, exactly:
CONCEPT: <name>
EXPLANATION: <text>
CAPTION:
{caption}
SUMMARY:
{summary}
"""

STAGE3_PANEL = """TASK: PANEL_DESCRIPTION
INSTRUCTIONS:
Describe what the attached sub-image shows: modality, anatomy, and notable
findings. Ground every statement in the visible content. Reply with the
description only.
PANEL LABEL:
{label}
SUB CAPTION:
{sub_caption}
CASE SUMMARY:
{summary}
"""

_QA_SKELETON = """Reply exactly in the skeleton:
CONTEXT: <background a reader needs, without giving the answer away>
QUESTION: <one question>
ANSWER: <the answer>"""

STAGE4_MULTI_SUBIMAGE = f"""TASK: INSTRUCTION_MULTI_SUBIMAGE
INSTRUCTIONS:
Write one training item whose question can only be answered by synthesizing
at least two of the sub-images described below, the way a clinician reads a
whole case. {_QA_SKELETON}
SUMMARY:
{{summary}}
KNOWLEDGE:
{{knowledge}}
PANEL DESCRIPTIONS:
{{panel_descriptions}}
CAPTION:
{{caption}}
"""

STAGE4_SINGLE_SUBIMAGE = f"""TASK: INSTRUCTION_SINGLE_SUBIMAGE
INSTRUCTIONS:
Write one training item focused on the single sub-image named below, while
staying aware of the surrounding compound figure. {_QA_SKELETON}
FOCUS PANEL:
{{focus_panel}}
SUMMARY:
{{summary}}
KNOWLEDGE:
{{knowledge}}
PANEL DESCRIPTIONS:
{{panel_descriptions}}
CAPTION:
{{caption}}
"""

STAGE4_COMPOUND = f"""TASK: INSTRUCTION_COMPOUND
INSTRUCTIONS:
Write one training item about the compound figure as a whole, testing global
and holistic understanding rather than any single panel. {_QA_SKELETON}
SUMMARY:
{{summary}}
KNOWLEDGE:
{{knowledge}}
PANEL DESCRIPTIONS:
{{panel_descriptions}}
CAPTION:
{{caption}}
"""

STAGE4_TEXT_ONLY = f"""TASK: INSTRUCTION_TEXT_ONLY
INSTRUCTIONS:
Write one training item answerable from medical knowledge and the context
alone; the trainee sees no image. {_QA_SKELETON}
SUMMARY:
{{summary}}
KNOWLEDGE:
{{knowledge}}
CAPTION:
{{caption}}
"""

STAGE4_MULTI_CHOICE = """TASK: INSTRUCTION_MULTI_CHOICE
INSTRUCTIONS:
Write one multiple-choice training item about the compound figure. Generate
three plausible distractors that a careless reader might pick. Reply exactly
in the skeleton:
CONTEXT: <background a reader needs, without giving the answer away>
QUESTION: <one question>
ANSWER: <the correct option text>
DISTRACTOR: <wrong option 1>
DISTRACTOR: <wrong option 2>
DISTRACTOR: <wrong option 3>
SUMMARY:
{summary}
KNOWLEDGE:
{knowledge}
PANEL DESCRIPTIONS:
{panel_descriptions}
CAPTION:
{caption}
"""

STAGE5_REFINE = """TASK: REFINE_CONTEXT
INSTRUCTIONS:
The context below shares wording with the answer, which would let a model
shortcut the question. Rewrite the context so it stays informative but no
longer contains the leaked phrases. Reply with the revised context only.
CONTEXT:
{context}
ANSWER:
{answer}
LEAKED PHRASES:
{phrases}
ATTEMPT:
{attempt}
"""

CORPUS_TAG = """TASK: CORPUS_TAG
INSTRUCTIONS:
Classify the figure described by this caption. Pick exactly one term from
each controlled vocabulary; answer outside the lists maps to "other". Reply
exactly:
MODALITY: <term>
ANATOMY: <term>
CAPTION:
{caption}
MODALITIES:
{modalities}
SYSTEMS:
{systems}
"""

REPAIR_NOTE = """REPAIR:
Your previous reply did not match the required skeleton. Reply again using
exactly the tags named in the instructions, nothing else.
"""
