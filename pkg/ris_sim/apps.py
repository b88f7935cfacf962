from django.apps import AppConfig


class RisSimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ris_sim'
    verbose_name = 'RIS Doppler simulator'
