from django.apps import AppConfig


class ScenarioAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'scenario'
    verbose_name = 'Merging scenario engine'
