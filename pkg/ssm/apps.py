from django.apps import AppConfig


class SsmConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ssm'
    verbose_name = 'Surrogate safety measures'
