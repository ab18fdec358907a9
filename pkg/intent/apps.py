from django.apps import AppConfig


class IntentConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'intent'
    verbose_name = 'Stop-or-go intent prediction'
