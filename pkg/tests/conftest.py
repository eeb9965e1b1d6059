import pytest

from kimatch.knowledge import load_default_categories, load_default_emotion_scale, load_default_lexicons
from kimatch.textproc import EventCatalog

CLINIC_POST = (
    "Then others that insisted that what I have is depression even though manic episodes "
    "aren't characteristic of depression. I dread having to retread all this again because "
    "the clinic where I get my mental health addressed is closing down due to loss in "
    "business caused by the pandemic"
)

SHELTER_POST = (
    "Need help. Have a friend who lives alone who is now suicidal from the isolation and "
    "anxiety, and already had depression. I've asked her to come to my house for the "
    "shelter in place, but she doesn't want to"
)

PROBLEM_ANXIETY = (
    "I am not sleeping much anymore. Anxiety is pretty high for the stability of the "
    "world and the future of trust. Probably need to take up drinking or something..."
)

REPLY_SUPPORTIVE = (
    "Giving up is in your control. Exercise can be lots of different things and a way to help anxiety."
)
REPLY_INFORMATIVE = "Anxiety is quite inducing. A good time to learn relaxation techniques"
REPLY_SIMILAR = (
    "I hear you. Myself and other friends with kids are going through similar anxiety right now"
)


@pytest.fixture(scope="session")
def lexicons():
    return load_default_lexicons()


@pytest.fixture(scope="session")
def categories():
    return load_default_categories()


@pytest.fixture(scope="session")
def emotion_scale():
    return load_default_emotion_scale()


@pytest.fixture(scope="session")
def event_catalog():
    return EventCatalog.load()
