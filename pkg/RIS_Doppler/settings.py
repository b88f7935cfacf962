"""
Django settings for the RIS_Doppler project.

The project hosts a single application, ``ris_sim``, which simulates RIS-assisted
mobile radio links and is driven through management commands
(``python manage.py run`` / ``python manage.py list_presets``).

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: the key only signs nothing here (no sessions, no HTTP),
# override it through the environment anyway when deploying.
SECRET_KEY = os.environ.get(
    'RIS_DOPPLER_SECRET_KEY',
    'django-insecure-ris-doppler-local-simulation-key')

DEBUG = os.environ.get('RIS_DOPPLER_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'ris_sim',
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/4.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
# https://docs.djangoproject.com/en/4.2/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'ris_sim': {
            'handlers': ['console'],
            'level': 'DEBUG' if DEBUG else 'INFO',
            'propagate': False,
        },
    },
}


# Simulator configuration, read through ris_sim.conf.ris_setting

RIS_SIM = {
    'OUTPUT_DIR': BASE_DIR / 'runs',
    'PERMUTATION_CAP': 10 ** 6,
    'DEFAULT_SEED': 42,
    # Base station and mobile station positions (x, y) in meters for the
    # random multi-IO geometry; the mobile moves away from the base station.
    'BS_POSITION': (-1000.0, 0.0),
    'MS_POSITION': (0.0, 0.0),
    # Placement rectangle (x_min, x_max, y_min, y_max) in meters.
    'SCENARIO_RECTANGLE': (200.0, 800.0, -300.0, 300.0),
    'RECORD_RUNS': True,
}
