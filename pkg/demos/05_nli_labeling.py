"""Walkthrough: labeling provider replies against a seeker problem.

The seeker post is the premise, each reply the hypothesis; entailment
means the responder shares the experience (Similar), contradiction means
push-back / advice (Supportive), neutral means guidelines (Informative).
"""

from kimatch.labeler import label_recommendations, nli

problem = ("I am not sleeping much anymore. Anxiety is pretty high for the stability of the "
           "world and the future of trust. Probably need to take up drinking or something...")

replies = [
    "Giving up is in your control. Exercise can be lots of different things and a way to help anxiety.",
    "Anxiety is quite inducing. A good time to learn relaxation techniques",
    "I hear you. Myself and other friends with kids are going through similar anxiety right now",
]

print("problem:", problem[:70], "...\n")
for text, label in label_recommendations(problem, replies):
    verdict = nli(problem, text)
    print(f"[{label.value:11s}] ({verdict.verdict.value:13s} conf={verdict.confidence:.2f}) {text[:60]}...")
