"""Browse the bundled study corpus: eight scenarios, three explanation texts
each, exactly as shown to study participants."""

from recourse import load_corpus
from recourse.scenarios import EXPLANATION_KINDS, display_text, profile_table

corpus = load_corpus()
print(f"{len(corpus.scenarios)} scenarios:",
      ", ".join(s.id for s in corpus.scenarios))

scenario = corpus.by_id("employee-1")
print("\n" + "=" * 70)
print(profile_table(scenario.profile, scenario.schema, scenario.title,
                    scenario.info.decision_header, scenario.decision_text))
print("\n" + scenario.narrative)
if scenario.scale_notes:
    print("\n" + scenario.scale_notes)

for kind in EXPLANATION_KINDS:
    print("\n" + "-" * 70)
    print(f"[{kind}]")
    print(display_text(scenario, kind))
