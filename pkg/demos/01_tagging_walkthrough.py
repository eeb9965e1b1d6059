"""Walkthrough: negation-aware condition tagging and event tagging.

Two real-shaped posts go through the full tagging stage. The first one
mentions depression twice but inside a negated sentence ("aren't
characteristic of depression"), so only the anxiety cue survives; the
clinic-closing sentence triggers the business-closure event.
"""

from kimatch.embed import HashedEmbedder
from kimatch.knowledge import load_default_lexicons
from kimatch.textproc import EventCatalog, Post, detect_negation, tag_condition, tag_event
from kimatch.tokenization import tokenize

lexicons = load_default_lexicons()
catalog = EventCatalog.load()
embedder = HashedEmbedder(lexicons=list(catalog.lexicons.values()))

clinic = Post(
    id="clinic", user_id="u1", timestamp=0.0,
    text=("Then others that insisted that what I have is depression even though manic episodes "
          "aren't characteristic of depression. I dread having to retread all this again because "
          "the clinic where I get my mental health addressed is closing down due to loss in "
          "business caused by the pandemic"),
)

tokens = tokenize(clinic.text)
print("tokens around the negation:", tokens[12:19])
for span in sorted(detect_negation(tokens), key=lambda s: s.cue):
    print(f"cue {tokens[span.cue]!r} at {span.cue} scopes {tokens[span.scope[0]:span.scope[1]]}")

tagged = tag_event(tag_condition(clinic, lexicons["anxiety"], lexicons["depression"]),
                   catalog, embedder)
print("\nconditions:", sorted(tagged.tags.conditions))
print("negated concepts:", sorted(tagged.tags.negated_concepts))
print("events:", sorted(tagged.tags.events))

shelter = Post(
    id="shelter", user_id="u2", timestamp=1.0,
    text=("Need help. Have a friend who lives alone who is now suicidal from the isolation and "
          "anxiety, and already had depression. I've asked her to come to my house for the "
          "shelter in place, but she doesn't want to"),
)
tagged2 = tag_event(tag_condition(shelter, lexicons["anxiety"], lexicons["depression"]),
                    catalog, embedder)
print("\nsecond post conditions:", sorted(tagged2.tags.conditions),
      "| events:", sorted(tagged2.tags.events))
